#include "nvespin/hamiltonian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "nvespin/constants.hpp"
#include "nvespin/spin_ops.hpp"

namespace nvespin {

Matrix3 tensor_matrix(const AxialTensor& t) {
  const Vector3 n = t.axis;
  return t.perpendicular_mhz * (Matrix3::Identity() - n * n.transpose()) +
         t.parallel_mhz * (n * n.transpose());
}

namespace {

// Adds sum_ab T_ab * A_a * B_b for two Cartesian vector operators.
void add_bilinear(ComplexMatrix& h, const Matrix3& t, const std::array<ComplexMatrix, 3>& a,
                  const std::array<ComplexMatrix, 3>& b) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (t(i, j) != 0.0) h += t(i, j) * (a[i] * b[j]);
}

}  // namespace

HamiltonianMatrix build_hamiltonian(const SpinSystem& sys, const FieldVector& field, int cap) {
  const int dim = sys.hilbert_dimension();
  if (dim > cap)
    throw DimensionCapError("build_hamiltonian: Hilbert dimension " + std::to_string(dim) +
                            " exceeds cap " + std::to_string(cap));
  if (sys.g_e <= 0.0) throw std::invalid_argument("SpinSystem: g_e must be positive");

  const auto spins = product_space_spins(sys);
  const Vector3 b = field.direction;
  const double bmag = field.magnitude_mt;

  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);

  // Electron Zeeman (isotropic g).
  const double ez = sys.g_e * constants::mu_b_mhz_per_mt * bmag;
  for (int a = 0; a < 3; ++a)
    if (b[a] != 0.0) h += (ez * b[a]) * spins[0][a];

  add_bilinear(h, tensor_matrix(sys.zfs), spins[0], spins[0]);

  for (int k = 0; k < static_cast<int>(sys.nuclei.size()); ++k) {
    const auto& nuc = sys.nuclei[k];
    add_bilinear(h, tensor_matrix(nuc.hyperfine), spins[0], spins[k + 1]);
    if (nuc.quadrupole)
      add_bilinear(h, tensor_matrix(*nuc.quadrupole), spins[k + 1], spins[k + 1]);
    const double nz = -nuc.g_n * constants::mu_n_mhz_per_mt * bmag;
    for (int a = 0; a < 3; ++a)
      if (b[a] != 0.0) h += (nz * b[a]) * spins[k + 1][a];
  }

  return HamiltonianMatrix{dim, std::move(h)};
}

EigenSolution eigensolve(const ComplexMatrix& h) {
  const double scale = h.norm();
  const double herm_resid = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (scale > 0 && herm_resid > 1e-9 * scale)
    throw NotHermitianError("eigensolve: Hermiticity residual " + std::to_string(herm_resid));

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success)
    throw NonConvergenceError("eigensolve: iteration cap exceeded");

  EigenSolution out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();

  // Deterministic phase: largest-magnitude component real positive.
  for (Eigen::Index c = 0; c < out.eigenvectors.cols(); ++c) {
    Eigen::Index imax = 0;
    double amax = -1.0;
    for (Eigen::Index r = 0; r < out.eigenvectors.rows(); ++r) {
      const double a = std::abs(out.eigenvectors(r, c));
      if (a > amax + 1e-15) {
        amax = a;
        imax = r;
      }
    }
    const std::complex<double> z = out.eigenvectors(imax, c);
    if (std::abs(z) > 0) out.eigenvectors.col(c) *= std::conj(z) / std::abs(z);
  }
  return out;
}

EigenSolution eigensolve(const HamiltonianMatrix& h) { return eigensolve(h.entries); }

}  // namespace nvespin
