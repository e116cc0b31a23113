#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "nvespin/spectra.hpp"
#include "nvespin/constants.hpp"
#include "nvespin/spin_ops.hpp"
#include "oracles.hpp"

using namespace nvespin;
using namespace nvespin::spectra;
namespace C = nvespin::constants;

namespace {

SpinSystem electron_only(double d_mhz = 2873.0, Vector3 axis = Vector3(1, 1, 1)) {
  SpinSystem sys;
  sys.g_e = 2.0030;
  sys.zfs = AxialTensor::zfs_from_d(d_mhz, axis.normalized());
  return sys;
}

std::array<PopulationSet, 4> equal_populations(double p = 1.0 / 3) {
  std::array<PopulationSet, 4> pops;
  pops.fill({p, p, p});
  return pops;
}

// Fig.-1-like pumping: sites 1,2 (the ~90 degree pair) T0-enhanced, 3,4
// T+/T- enhanced.
std::array<PopulationSet, 4> paper_populations() {
  std::array<PopulationSet, 4> pops;
  pops[0] = pops[1] = {0.2, 0.6, 0.2};
  pops[2] = pops[3] = {0.4, 0.2, 0.4};
  return pops;
}

}  // namespace

TEST_CASE("transition_energies: selection rule at D=0") {
  const auto sys = electron_only(0.0, Vector3::UnitZ());
  const auto tr = transition_energies(sys, FieldVector(342.4, Vector3::UnitZ()));
  REQUIRE(tr.size() == 3);
  std::map<std::pair<int, int>, double> m;
  for (const auto& t : tr) m[{t.i, t.j}] = t.moment_sq;
  CHECK(m[{0, 1}] == doctest::Approx(m[{1, 2}]).epsilon(1e-12));
  CHECK(m[{0, 1}] > 0.1);
  CHECK(m[{0, 2}] < 1e-20);  // forbidden double-quantum
}

TEST_CASE("transition_energies: on-axis site splits by 2D") {
  const auto sys = electron_only();
  const Vector3 axis = sys.zfs.axis;
  const auto tr = transition_energies(sys, FieldVector(342.4, axis));
  const double ez = sys.g_e * C::mu_b_mhz_per_mt * 342.4;
  std::vector<double> allowed;
  for (const auto& t : tr)
    if (t.moment_sq > 0.1) allowed.push_back(t.delta_e_mhz);
  REQUIRE(allowed.size() == 2);
  std::sort(allowed.begin(), allowed.end());
  CHECK(allowed[0] == doctest::Approx(ez - 2873.0).epsilon(1e-9));
  CHECK(allowed[1] == doctest::Approx(ez + 2873.0).epsilon(1e-9));
  CHECK(allowed[1] - allowed[0] == doctest::Approx(2.0 * 2873.0).epsilon(1e-9));
}

TEST_CASE("transition_energies: theta=90 moments match a dense oracle") {
  const auto sys = electron_only();
  const Vector3 dir = Vector3(1, -1, 0).normalized();  // perpendicular to [111]
  REQUIRE(std::abs(dir.dot(sys.zfs.axis)) < 1e-12);
  const FieldVector field(342.4, dir);
  const auto tr = transition_energies(sys, field, MwPolarization::single_axis);

  // oracle: independent Jacobi diagonalization and direct matrix elements
  const auto h = build_hamiltonian(sys, field);
  const auto oracle = oracles::jacobi_hermitian(h.entries);
  const auto spins = product_space_spins(sys);
  Vector3 m1 = dir.cross(Vector3::UnitZ());
  if (m1.norm() < 1e-8) m1 = dir.cross(Vector3::UnitX());
  m1.normalize();
  const ComplexMatrix sperp = m1[0] * spins[0][0] + m1[1] * spins[0][1] + m1[2] * spins[0][2];
  for (const auto& t : tr) {
    const std::complex<double> el =
        (oracle.vectors.col(t.j).adjoint() * sperp * oracle.vectors.col(t.i))(0, 0);
    CHECK(std::abs(t.moment_sq - std::norm(el)) < 1e-9);
    CHECK(t.delta_e_mhz ==
          doctest::Approx(oracle.values[t.j] - oracle.values[t.i]).epsilon(1e-9));
  }
}

TEST_CASE("resonance_fields: D=0 scalar inversion") {
  const auto sys = electron_only(0.0, Vector3::UnitZ());
  const auto found = resonance_fields_single(sys, 9.6, Vector3::UnitZ(), {250, 450});
  const double expect = 9600.0 / (sys.g_e * C::mu_b_mhz_per_mt);
  REQUIRE(found.roots.size() == 2);  // two degenerate allowed transitions
  for (const auto& r : found.roots) CHECK(r.field_mt == doctest::Approx(expect).epsilon(1e-7));
}

TEST_CASE("resonance_fields: theta=90 within 3 mT of the first-order estimate") {
  const auto sys = electron_only();
  const Vector3 dir = Vector3(1, -1, 0).normalized();
  const auto found = resonance_fields_single(sys, 9.6, dir, {250, 450});
  const double b0 = 9600.0 / (2.0030 * C::mu_b_mhz_per_mt);
  const double shift = 0.5 * 2873.0 / (2.0030 * C::mu_b_mhz_per_mt);  // D/2 in field units
  std::vector<double> fields;
  for (const auto& r : found.roots) fields.push_back(r.field_mt);
  std::sort(fields.begin(), fields.end());
  REQUIRE(fields.size() == 2);
  CHECK(std::abs(fields[0] - (b0 - shift)) < 3.0);
  CHECK(std::abs(fields[1] - (b0 + shift)) < 3.0);
}

TEST_CASE("stick_spectrum: paper [110] configuration gives 8 lines, S2+ near 390 mT") {
  const auto sys = electron_only();
  const auto spec = stick_spectrum(sys, 9.6, Vector3(1, 1, 0).normalized(), {2, 2.2, 0},
                                   paper_populations(), {250, 450});
  CHECK(spec.lines.size() == 8);
  bool found_s2p = false;
  for (const auto& l : spec.lines)
    if (l.label.site == 2 && l.label.branch == Branch::plus) {
      found_s2p = true;
      CHECK(std::abs(l.field_mt - 390.0) < 5.0);
    }
  CHECK(found_s2p);
}

TEST_CASE("stick_spectrum: root certification within 1 kHz") {
  const auto sys = electron_only();
  const Vector3 dir = rotate_field(Vector3(1, 1, 0).normalized(), {2, 2.2, 0});
  const auto order = site_order(dir);
  const auto spec = stick_spectrum(sys, 9.6, Vector3(1, 1, 0).normalized(), {2, 2.2, 0},
                                   equal_populations(), {250, 450});
  for (const auto& l : spec.lines) {
    const auto s = site_system(sys, order[l.label.site - 1]);
    const auto tr = transition_energies(s, FieldVector(l.field_mt, dir));
    double best = 1e9;
    for (const auto& t : tr) best = std::min(best, std::abs(t.delta_e_mhz - 9600.0));
    CHECK(best < 1e-3);  // 1 kHz
  }
}

TEST_CASE("stick_spectrum: exact [001] collapses to 2 distinct fields") {
  const auto sys = electron_only();
  const auto spec = stick_spectrum(sys, 9.6, Vector3(0, 0, 1), {0, 0, 0}, equal_populations(),
                                   {250, 450});
  CHECK(spec.lines.size() == 8);
  std::vector<double> fields;
  for (const auto& l : spec.lines) fields.push_back(l.field_mt);
  std::sort(fields.begin(), fields.end());
  CHECK(fields[3] - fields[0] < 1e-3);
  CHECK(fields[7] - fields[4] < 1e-3);
  CHECK(fields[4] - fields[3] > 1.0);
}

TEST_CASE("stick_spectrum: population sign pattern of Fig. 1") {
  const auto sys = electron_only();
  const auto spec = stick_spectrum(sys, 9.6, Vector3(1, 1, 0).normalized(), {2, 2.2, 0},
                                   paper_populations(), {250, 450});
  REQUIRE(spec.lines.size() == 8);
  for (const auto& l : spec.lines) {
    if (l.label.site <= 2) {
      if (l.label.branch == Branch::plus) CHECK(l.signed_amplitude > 0);
      if (l.label.branch == Branch::minus) CHECK(l.signed_amplitude < 0);
    } else {
      if (l.label.branch == Branch::plus) CHECK(l.signed_amplitude < 0);
      if (l.label.branch == Branch::minus) CHECK(l.signed_amplitude > 0);
    }
  }
}

TEST_CASE("stick_spectrum: thermal populations vanish; population flip inverts the sign") {
  const auto sys = electron_only();
  const auto spec = stick_spectrum(sys, 9.6, Vector3(1, 1, 0).normalized(), {2, 2.2, 0},
                                   equal_populations(0.25), {250, 450});
  for (const auto& l : spec.lines) CHECK(l.signed_amplitude == doctest::Approx(0.0));

  // asymmetric populations: swapping p_plus and p_minus flips every
  // signed amplitude exactly (lower/upper swap on both branches)
  std::array<PopulationSet, 4> a;
  a.fill({0.1, 0.6, 0.3});
  std::array<PopulationSet, 4> b;
  b.fill({0.3, 0.6, 0.1});
  const auto sa = stick_spectrum(sys, 9.6, Vector3(1, 1, 0).normalized(), {2, 2.2, 0}, a,
                                 {250, 450});
  const auto sb = stick_spectrum(sys, 9.6, Vector3(1, 1, 0).normalized(), {2, 2.2, 0}, b,
                                 {250, 450});
  REQUIRE(sa.lines.size() == sb.lines.size());
  for (size_t i = 0; i < sa.lines.size(); ++i) {
    const auto& la = sa.lines[i];
    // match by label
    const auto it = std::find_if(sb.lines.begin(), sb.lines.end(), [&](const ResonanceLine& l) {
      return l.label.site == la.label.site && l.label.branch == la.label.branch;
    });
    REQUIRE(it != sb.lines.end());
    // p0 - p+ <-> p0 - p-: plus branch amplitude (p0 - p+) maps to (p0 - p-)
    // which equals minus branch's -(p- - p0); with the swap the two branches
    // exchange magnitudes and signs flip within each branch pair.
    CHECK(la.signed_amplitude ==
          doctest::Approx(-(it->signed_amplitude)).epsilon(1e-12));
  }
}

TEST_CASE("stick_spectrum: symmetry-equivalent orientation leaves the field multiset") {
  const auto sys = electron_only();
  const EulerAngles e1{2, 2.2, 0};
  const auto s1 = stick_spectrum(sys, 9.6, Vector3(1, 1, 0).normalized(), e1,
                                 equal_populations(), {250, 450});
  const Vector3 d1 = rotate_field(Vector3(1, 1, 0).normalized(), e1);
  const Vector3 d2 = site_symmetry_op(3) * d1;  // C2 about z permutes the sites
  const auto order2 = site_order(d2);
  std::vector<double> f1, f2;
  for (const auto& l : s1.lines) f1.push_back(l.field_mt);
  for (int rank = 0; rank < 4; ++rank) {
    const auto s = site_system(sys, order2[rank]);
    const auto roots = resonance_fields_single(s, 9.6, d2, {250, 450});
    for (const auto& r : roots.roots) f2.push_back(r.field_mt);
  }
  std::sort(f1.begin(), f1.end());
  std::sort(f2.begin(), f2.end());
  REQUIRE(f1.size() == f2.size());
  for (size_t i = 0; i < f1.size(); ++i) CHECK(std::abs(f1[i] - f2[i]) < 1e-3);
}

TEST_CASE("broaden: normalization, cancellation, extrema count") {
  StickSpectrum spec;
  spec.lines.push_back({{1, Branch::plus}, 350.0, 1.0, 1.0});
  const double w = 0.5;
  const auto curve = broaden(spec, {340, 360}, w, 4001);
  double peak = 0.0, integral = 0.0;
  const double db = curve.field_mt[1] - curve.field_mt[0];
  for (Eigen::Index i = 0; i < curve.amplitude.size(); ++i) {
    peak = std::max(peak, curve.amplitude[i]);
    integral += curve.amplitude[i] * db;
  }
  CHECK(peak == doctest::Approx(1.0 / (w * std::sqrt(2 * M_PI))).epsilon(1e-6));
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));

  spec.lines.push_back({{1, Branch::minus}, 350.0, 1.0, -1.0});
  const auto zero = broaden(spec, {340, 360}, w, 1001);
  CHECK(zero.amplitude.cwiseAbs().maxCoeff() < 1e-14);

  const auto sys = electron_only();
  const auto full = stick_spectrum(sys, 9.6, Vector3(1, 1, 0).normalized(), {2, 2.2, 0},
                                   paper_populations(), {250, 450});
  const auto fc = broaden(full, {250, 450}, 0.4, 8001);
  int extrema = 0;
  for (Eigen::Index i = 1; i + 1 < fc.amplitude.size(); ++i) {
    const double a = fc.amplitude[i];
    if (std::abs(a) < 1e-3) continue;
    if ((a > fc.amplitude[i - 1] && a > fc.amplitude[i + 1] && a > 0) ||
        (a < fc.amplitude[i - 1] && a < fc.amplitude[i + 1] && a < 0))
      ++extrema;
  }
  CHECK(extrema == 8);
}

TEST_CASE("site_order: [110] ranks the 90-degree pair first") {
  const Vector3 dir = rotate_field(Vector3(1, 1, 0).normalized(), {2, 2.2, 0});
  const auto order = site_order(dir);
  const auto& axes = nv_site_axes();
  const double a1 = std::acos(std::abs(axes[order[0]].dot(dir))) * 180 / M_PI;
  const double a4 = std::acos(std::abs(axes[order[3]].dot(dir))) * 180 / M_PI;
  CHECK(a1 > 80.0);
  CHECK(a4 < 40.0);
}
