#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "nvespin/errors.hpp"

namespace nvespin {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Spin quantum number stored as the multiplicity 2S+1 (or 2I+1).
struct SpinQuantum {
  int multiplicity = 2;

  explicit SpinQuantum(int mult) : multiplicity(mult) {
    if (mult < 2) throw std::invalid_argument("SpinQuantum: multiplicity must be >= 2");
  }
  double spin() const { return 0.5 * (multiplicity - 1); }
};

inline Vector3 normalized_or_throw(const Vector3& v, const char* what) {
  const double n = v.norm();
  if (n < 1e-12) throw std::invalid_argument(std::string(what) + ": zero vector");
  return v / n;
}

// Axial 3x3 interaction tensor: principal values (perp, perp, par) with the
// unique (par) principal axis given in the crystal frame. Covers the ZFS,
// hyperfine and quadrupole tensors; all are assumed axial here.
struct AxialTensor {
  double parallel_mhz = 0.0;
  double perpendicular_mhz = 0.0;
  Vector3 axis = Vector3::UnitZ();

  AxialTensor() = default;
  AxialTensor(double par, double perp, const Vector3& ax)
      : parallel_mhz(par),
        perpendicular_mhz(perp),
        axis(normalized_or_throw(ax, "AxialTensor axis")) {}

  // Traceless ZFS tensor for axial constant D: principal values (2D/3, -D/3).
  static AxialTensor zfs_from_d(double d_mhz, const Vector3& ax) {
    return AxialTensor(2.0 * d_mhz / 3.0, -d_mhz / 3.0, ax);
  }

  // Traceless axial quadrupole tensor from P_parallel (eta = 0).
  static AxialTensor quadrupole_from_p(double p_par_mhz, const Vector3& ax) {
    return AxialTensor(p_par_mhz, -0.5 * p_par_mhz, ax);
  }

  // Axial ZFS constant D recovered from the traceless form.
  double zfs_d() const { return parallel_mhz - perpendicular_mhz; }
};

// Full 3x3 matrix of an axial tensor: perp*(1 - nn^T) + par*nn^T.
Matrix3 tensor_matrix(const AxialTensor& t);

struct NucleusSpec {
  SpinQuantum spin;
  double g_n = 0.0;
  AxialTensor hyperfine;
  std::optional<AxialTensor> quadrupole;  // requires spin >= 1
  std::string label;

  NucleusSpec(SpinQuantum s, double gn, AxialTensor hf,
              std::optional<AxialTensor> q = std::nullopt, std::string lbl = {})
      : spin(s), g_n(gn), hyperfine(hf), quadrupole(std::move(q)), label(std::move(lbl)) {
    if (quadrupole && spin.multiplicity < 3)
      throw std::invalid_argument("NucleusSpec: quadrupole requires I >= 1");
  }

  double a_iso() const {
    return (hyperfine.parallel_mhz + 2.0 * hyperfine.perpendicular_mhz) / 3.0;
  }
  double t_aniso() const {
    return (hyperfine.parallel_mhz - hyperfine.perpendicular_mhz) / 3.0;
  }
};

// Electron S=1 with isotropic g, axial ZFS and a list of coupled nuclei.
struct SpinSystem {
  double g_e = 2.0030;
  AxialTensor zfs;  // traceless form, see AxialTensor::zfs_from_d
  std::vector<NucleusSpec> nuclei;

  int hilbert_dimension() const {
    int d = 3;
    for (const auto& n : nuclei) d *= n.spin.multiplicity;
    return d;
  }
  int nuclear_dimension() const {
    int d = 1;
    for (const auto& n : nuclei) d *= n.spin.multiplicity;
    return d;
  }
};

struct FieldVector {
  double magnitude_mt = 0.0;
  Vector3 direction = Vector3::UnitZ();

  FieldVector() = default;
  FieldVector(double mag, const Vector3& dir)
      : magnitude_mt(mag), direction(normalized_or_throw(dir, "FieldVector direction")) {
    if (mag < 0.0) throw std::invalid_argument("FieldVector: magnitude must be >= 0");
  }
};

// ZYZ Euler angles in degrees. The rotation matrix is
// Rz(alpha) * Ry(beta) * Rz(gamma) applied to column vectors.
struct EulerAngles {
  double alpha_deg = 0.0;
  double beta_deg = 0.0;
  double gamma_deg = 0.0;
};

struct HamiltonianMatrix {
  int dimension = 0;
  ComplexMatrix entries;  // MHz
};

// Sorted real eigenvalues (MHz, ascending) and phase-fixed orthonormal
// eigenvectors (columns) of a Hermitian Hamiltonian.
struct EigenSolution {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
};

}  // namespace nvespin
