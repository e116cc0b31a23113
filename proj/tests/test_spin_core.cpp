#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nvespin/constants.hpp"
#include "nvespin/hamiltonian.hpp"
#include "nvespin/rotations.hpp"
#include "nvespin/spin_ops.hpp"
#include "oracles.hpp"

using namespace nvespin;
namespace C = nvespin::constants;

namespace {

SpinSystem nv_14n() {
  SpinSystem sys;
  sys.g_e = 2.0030;
  sys.zfs = AxialTensor::zfs_from_d(2873.0, Vector3(1, 1, 1).normalized());
  const Vector3 ax = Vector3(1, 1, 1).normalized();
  sys.nuclei.emplace_back(SpinQuantum(3), C::g_n_14n, AxialTensor(-2.19, -2.65, ax),
                          AxialTensor::quadrupole_from_p(-4.95, ax), "14N");
  return sys;
}

}  // namespace

TEST_CASE("spin_matrices: spin-1/2 gives Pauli/2") {
  const auto s = spin_matrices(SpinQuantum(2));
  CHECK(s.sz(0, 0).real() == doctest::Approx(0.5));
  CHECK(s.sz(1, 1).real() == doctest::Approx(-0.5));
  CHECK(s.sx(0, 1).real() == doctest::Approx(0.5));
  CHECK(s.sy(0, 1).imag() == doctest::Approx(-0.5));
}

TEST_CASE("spin_matrices: spin-1 ladder structure") {
  const auto s = spin_matrices(SpinQuantum(3));
  CHECK(s.sz(0, 0).real() == doctest::Approx(1.0));
  CHECK(s.sz(1, 1).real() == doctest::Approx(0.0));
  CHECK(s.sz(2, 2).real() == doctest::Approx(-1.0));
  CHECK(s.sx(0, 1).real() == doctest::Approx(1.0 / std::sqrt(2.0)));

  // S^2 = S(S+1) I, direct matrix arithmetic
  const ComplexMatrix s2 = s.sx * s.sx + s.sy * s.sy + s.sz * s.sz;
  CHECK((s2 - 2.0 * ComplexMatrix::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("spin_matrices: commutators [Sx,Sy] = i Sz for several multiplicities") {
  for (int mult : {2, 3, 4, 5, 6}) {
    const auto s = spin_matrices(SpinQuantum(mult));
    const ComplexMatrix comm = s.sx * s.sy - s.sy * s.sx;
    CHECK((comm - std::complex<double>(0, 1) * s.sz).norm() < 1e-13);
    const double sval = 0.5 * (mult - 1);
    const ComplexMatrix s2 = s.sx * s.sx + s.sy * s.sy + s.sz * s.sz;
    CHECK((s2 - sval * (sval + 1) * ComplexMatrix::Identity(mult, mult)).norm() < 1e-12);
  }
}

TEST_CASE("tensor_matrix: principal values and axis") {
  const Vector3 ax = Vector3(1, 1, 1).normalized();
  const AxialTensor t(-2.19, -2.65, ax);
  const Matrix3 m = tensor_matrix(t);
  CHECK(m.trace() == doctest::Approx(-7.49));  // A_par + 2 A_perp
  CHECK((m - m.transpose()).norm() < 1e-12);
  CHECK((m * ax - t.parallel_mhz * ax).norm() < 1e-12);

  const Matrix3 iso = tensor_matrix(AxialTensor(3.0, 3.0, Vector3(0, 1, 0)));
  CHECK((iso - 3.0 * Matrix3::Identity()).norm() < 1e-12);

  const Matrix3 proj = tensor_matrix(AxialTensor(1.0, 0.0, Vector3(0, 0, 1)));
  Matrix3 expect = Matrix3::Zero();
  expect(2, 2) = 1.0;
  CHECK((proj - expect).norm() < 1e-12);
}

TEST_CASE("build_hamiltonian: pure ZFS splitting") {
  SpinSystem sys;
  sys.g_e = 2.0030;
  sys.zfs = AxialTensor::zfs_from_d(2873.0, Vector3(1, 1, 1).normalized());
  const auto eig = eigensolve(build_hamiltonian(sys, FieldVector(0.0, Vector3::UnitZ())));
  // S.D.S alone: {-2D/3, D/3, D/3}
  CHECK(eig.eigenvalues[0] == doctest::Approx(-2.0 * 2873.0 / 3.0).epsilon(1e-10));
  CHECK(eig.eigenvalues[1] == doctest::Approx(2873.0 / 3.0).epsilon(1e-10));
  CHECK(eig.eigenvalues[2] == doctest::Approx(2873.0 / 3.0).epsilon(1e-10));
  CHECK(eig.eigenvalues[1] - eig.eigenvalues[0] == doctest::Approx(2873.0));
}

TEST_CASE("build_hamiltonian: Zeeman splitting and linearity") {
  SpinSystem sys;
  sys.g_e = 2.0030;
  sys.zfs = AxialTensor::zfs_from_d(0.0, Vector3::UnitZ());
  const double b = 342.4;
  const auto eig = eigensolve(build_hamiltonian(sys, FieldVector(b, Vector3::UnitZ())));
  const double expect = sys.g_e * C::mu_b_mhz_per_mt * b;  // 9599 MHz at 342.4 mT
  CHECK(std::abs(eig.eigenvalues[2] - eig.eigenvalues[1] - expect) < 1e-10 * expect);
  CHECK(std::abs(eig.eigenvalues[1] - eig.eigenvalues[0] - expect) < 1e-10 * expect);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(10.0, 600.0);
  for (int k = 0; k < 10; ++k) {
    const double bk = u(rng);
    const auto e = eigensolve(build_hamiltonian(sys, FieldVector(bk, Vector3::UnitZ())));
    const double spread = e.eigenvalues[2] - e.eigenvalues[0];
    CHECK(std::abs(spread - 2.0 * sys.g_e * C::mu_b_mhz_per_mt * bk) <
          1e-10 * std::abs(spread));
  }
}

TEST_CASE("build_hamiltonian: NV + 14N is 9x9 Hermitian, ZFS/quadrupole traceless") {
  const auto sys = nv_14n();
  const auto h = build_hamiltonian(sys, FieldVector(350.0, Vector3(0, 0, 1)));
  CHECK(h.dimension == 9);
  CHECK((h.entries - h.entries.adjoint()).cwiseAbs().maxCoeff() < 1e-9 * h.entries.norm());
  CHECK(std::abs(tensor_matrix(sys.zfs).trace()) < 1e-9);
  CHECK(std::abs(tensor_matrix(*sys.nuclei[0].quadrupole).trace()) < 1e-9);
}

TEST_CASE("build_hamiltonian: dimension cap") {
  SpinSystem sys = nv_14n();
  for (int k = 0; k < 3; ++k) sys.nuclei.push_back(sys.nuclei[0]);  // 3*3^4 = 243
  CHECK_THROWS_AS(build_hamiltonian(sys, FieldVector(350.0, Vector3(0, 0, 1))),
                  DimensionCapError);
}

TEST_CASE("eigensolve: trivial diagonal and phase convention") {
  ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  h(0, 0) = 3;
  h(1, 1) = 1;
  h(2, 2) = 2;
  const auto eig = eigensolve(h);
  CHECK(eig.eigenvalues[0] == doctest::Approx(1));
  CHECK(eig.eigenvalues[1] == doctest::Approx(2));
  CHECK(eig.eigenvalues[2] == doctest::Approx(3));
  // permutation eigenvectors with real-positive convention
  CHECK(eig.eigenvectors(1, 0).real() == doctest::Approx(1));
  CHECK(eig.eigenvectors(2, 1).real() == doctest::Approx(1));
  CHECK(eig.eigenvectors(0, 2).real() == doctest::Approx(1));
}

TEST_CASE("eigensolve: rejects non-Hermitian input") {
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(0, 1) = 1.0;
  CHECK_THROWS_AS(eigensolve(h), NotHermitianError);
}

TEST_CASE("eigensolve: NV 9x9 against the Jacobi oracle") {
  const auto sys = nv_14n();
  const auto h = build_hamiltonian(sys, FieldVector(350.0, Vector3(0, 0, 1)));
  const auto eig = eigensolve(h);
  const auto oracle = oracles::jacobi_hermitian(h.entries);
  for (int i = 0; i < 9; ++i)
    CHECK(std::abs(eig.eigenvalues[i] - oracle.values[i]) < 1e-6);
  // reconstruction residual
  const ComplexMatrix resid =
      h.entries * eig.eigenvectors - eig.eigenvectors * eig.eigenvalues.asDiagonal();
  CHECK(resid.norm() < 1e-7 * h.entries.norm());
  CHECK((eig.eigenvectors.adjoint() * eig.eigenvectors - ComplexMatrix::Identity(9, 9)).norm() <
        1e-9);
}

TEST_CASE("eigensolve: trace conservation on random Hermitian matrices") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const int n = 2 + static_cast<int>(rng() % 11);
    const ComplexMatrix h = oracles::random_hermitian(n, rng, 10.0);
    const auto eig = eigensolve(h);
    CHECK(std::abs(eig.eigenvalues.sum() - h.trace().real()) <
          1e-7 * std::max(1.0, h.norm()));
  }
}

TEST_CASE("invariant: eigenvalues depend on field direction only through theta") {
  SpinSystem sys;
  sys.g_e = 2.0030;
  sys.zfs = AxialTensor::zfs_from_d(2873.0, Vector3(1, 1, 1).normalized());
  const Vector3 axis = sys.zfs.axis;
  // a direction at fixed angle to the ZFS axis
  const Vector3 perp = axis.cross(Vector3::UnitZ()).normalized();
  const Vector3 d0 = (std::cos(0.4) * axis + std::sin(0.4) * perp).normalized();
  const auto ref = eigensolve(build_hamiltonian(sys, FieldVector(350.0, d0)));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  for (int k = 0; k < 8; ++k) {
    const Vector3 dk = Eigen::AngleAxisd(u(rng), axis) * d0;
    const auto ek = eigensolve(build_hamiltonian(sys, FieldVector(350.0, dk)));
    CHECK((ek.eigenvalues - ref.eigenvalues).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("invariant: permuting the nuclei list leaves eigenvalues unchanged") {
  SpinSystem sys = nv_14n();
  const Vector3 cax = Vector3(1, 1, -1).normalized();
  sys.nuclei.emplace_back(SpinQuantum(2), C::g_n_13c, AxialTensor(3.13, 2.49, cax),
                          std::nullopt, "13C");
  SpinSystem swapped = sys;
  std::swap(swapped.nuclei[0], swapped.nuclei[1]);
  const FieldVector field(350.0, Vector3(0, 0, 1));
  const auto e1 = eigensolve(build_hamiltonian(sys, field));
  const auto e2 = eigensolve(build_hamiltonian(swapped, field));
  CHECK((e1.eigenvalues - e2.eigenvalues).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("nv_site_axes: tetrahedral geometry") {
  const auto& axes = nv_site_axes();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      CHECK(axes[i].dot(axes[j]) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));

  const Vector3 b110 = Vector3(1, 1, 0).normalized();
  const double a0 = std::acos(std::abs(axes[0].dot(b110))) * 180.0 / M_PI;
  CHECK(a0 == doctest::Approx(35.26).epsilon(1e-3));  // [111] vs [110]
  CHECK(std::abs(axes[2].dot(b110)) < 1e-12);         // [-1,1,-1] vs [110]: 90 degrees
}

TEST_CASE("rotate_field: convention anchors") {
  const Vector3 v110 = Vector3(1, 1, 0).normalized();
  CHECK((rotate_field(v110, {0, 0, 0}) - v110).norm() < 1e-15);
  CHECK((rotate_field(Vector3::UnitZ(), {0, 90, 0}) - Vector3::UnitX()).norm() < 1e-12);

  // independent composition oracle for the (2, 2.2, 0) misalignment
  const Vector3 got = rotate_field(v110, {2, 2.2, 0});
  const Vector3 expect = (oracles::zyz(2, 2.2, 0) * v110).normalized();
  CHECK((got - expect).norm() < 1e-12);
  const double angle = std::acos(std::clamp(got.dot(v110), -1.0, 1.0)) * 180.0 / M_PI;
  CHECK(angle == doctest::Approx(2.5502).epsilon(1e-3));
}

TEST_CASE("euler_zyz_matrix: proper rotation for random angles") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-180.0, 180.0);
  for (int k = 0; k < 20; ++k) {
    const Matrix3 r = euler_zyz_matrix({u(rng), u(rng), u(rng)});
    CHECK((r * r.transpose() - Matrix3::Identity()).norm() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("invariant: Hermiticity for random systems and fields") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    SpinSystem sys;
    sys.g_e = 2.0030;
    sys.zfs = AxialTensor::zfs_from_d(2873.0, Vector3(u(rng), u(rng), u(rng) + 1.5));
    const Vector3 nax(u(rng), u(rng), u(rng) + 1.2);
    sys.nuclei.emplace_back(SpinQuantum(3), C::g_n_14n,
                            AxialTensor(4 * u(rng), 4 * u(rng), nax),
                            AxialTensor::quadrupole_from_p(5 * u(rng), nax), "n");
    const Vector3 dir(u(rng), u(rng), u(rng) + 1.1);
    const auto h =
        build_hamiltonian(sys, FieldVector(300.0 + 100.0 * u(rng), dir.normalized()));
    CHECK((h.entries - h.entries.adjoint()).cwiseAbs().maxCoeff() <
          1e-9 * std::max(1.0, h.entries.norm()));
  }
}
