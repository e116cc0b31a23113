#pragma once

// Test-only reference implementations, independent of the library code paths
// they check: a cyclic-Jacobi Hermitian eigensolver, a naive DFT, and small
// generators. Kept deliberately simple and slow.

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

namespace oracles {

using Eigen::MatrixXcd;
using Eigen::VectorXd;

struct JacobiEig {
  VectorXd values;    // ascending
  MatrixXcd vectors;  // columns
};

// Cyclic Jacobi for complex Hermitian matrices: repeatedly zero the largest
// off-diagonal element with a complex plane rotation.
inline JacobiEig jacobi_hermitian(MatrixXcd a, int max_sweeps = 100) {
  const int n = static_cast<int>(a.rows());
  MatrixXcd v = MatrixXcd::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (off < 1e-26 * std::max(1.0, a.squaredNorm())) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const std::complex<double> apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double phi = std::arg(apq);
        const double theta = 0.5 * std::atan2(2.0 * std::abs(apq), aqq - app);
        const double c = std::cos(theta), s = std::sin(theta);
        const std::complex<double> eip = std::polar(1.0, phi);
        MatrixXcd j = MatrixXcd::Identity(n, n);
        j(p, p) = c;
        j(p, q) = s * eip;
        j(q, p) = -s * std::conj(eip);
        j(q, q) = c;
        a = j.adjoint() * a * j;
        v = v * j;
      }
    }
  }
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int i, int k) { return a(i, i).real() < a(k, k).real(); });
  JacobiEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = a(idx[k], idx[k]).real();
    out.vectors.col(k) = v.col(idx[k]);
  }
  return out;
}

inline MatrixXcd random_hermitian(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = std::complex<double>(g(rng), g(rng));
  return 0.5 * (a + a.adjoint().eval());
}

// Direct-sum DFT with the e^{+i 2 pi nu t} kernel on arbitrary sample times.
inline std::complex<double> naive_dft(const std::vector<double>& t,
                                      const std::vector<double>& y, double freq) {
  std::complex<double> acc(0, 0);
  for (size_t k = 0; k < t.size(); ++k) acc += y[k] * std::polar(1.0, 2.0 * M_PI * freq * t[k]);
  return acc;
}

// Independent ZYZ composition (column-vector convention) for rotation checks.
inline Eigen::Matrix3d zyz(double a_deg, double b_deg, double g_deg) {
  const double d2r = M_PI / 180.0;
  return (Eigen::AngleAxisd(a_deg * d2r, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(b_deg * d2r, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(g_deg * d2r, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

}  // namespace oracles
