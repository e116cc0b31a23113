#include "nvespin/spin_ops.hpp"

#include <cmath>

namespace nvespin {

SpinMatrices spin_matrices(const SpinQuantum& spin) {
  const int d = spin.multiplicity;
  const double s = spin.spin();

  ComplexMatrix sz = ComplexMatrix::Zero(d, d);
  ComplexMatrix sp = ComplexMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) sz(k, k) = s - k;  // m descending: S .. -S
  for (int k = 0; k + 1 < d; ++k) {
    const double m = s - (k + 1);  // S+ |m> -> |m+1>
    sp(k, k + 1) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  const ComplexMatrix sm = sp.adjoint();

  SpinMatrices out;
  out.sx = 0.5 * (sp + sm);
  out.sy = std::complex<double>(0, -0.5) * (sp - sm);
  out.sz = sz;
  return out;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix embed(const ComplexMatrix& op, const std::vector<int>& dims, int index) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
    if (k == index)
      out = kron(out, op);
    else
      out = kron(out, ComplexMatrix::Identity(dims[k], dims[k]));
  }
  return out;
}

std::vector<std::array<ComplexMatrix, 3>> product_space_spins(const SpinSystem& sys) {
  std::vector<int> dims{3};
  for (const auto& n : sys.nuclei) dims.push_back(n.spin.multiplicity);

  std::vector<std::array<ComplexMatrix, 3>> out;
  const SpinMatrices se = spin_matrices(SpinQuantum(3));
  out.push_back({embed(se.sx, dims, 0), embed(se.sy, dims, 0), embed(se.sz, dims, 0)});
  for (int k = 0; k < static_cast<int>(sys.nuclei.size()); ++k) {
    const SpinMatrices si = spin_matrices(sys.nuclei[k].spin);
    out.push_back(
        {embed(si.sx, dims, k + 1), embed(si.sy, dims, k + 1), embed(si.sz, dims, k + 1)});
  }
  return out;
}

}  // namespace nvespin
