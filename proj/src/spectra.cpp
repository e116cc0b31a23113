#include "nvespin/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "nvespin/constants.hpp"
#include "nvespin/spin_ops.hpp"

namespace nvespin::spectra {

namespace {

// Two orthonormal axes perpendicular to B0, chosen deterministically:
// b x z normalized, falling back to b x x when B0 is along z.
std::array<Vector3, 2> mw_axes(const Vector3& b) {
  Vector3 m1 = b.cross(Vector3::UnitZ());
  if (m1.norm() < 1e-8) m1 = b.cross(Vector3::UnitX());
  m1.normalize();
  const Vector3 m2 = b.cross(m1).normalized();
  return {m1, m2};
}

// Electron spin operator along a unit vector, in the full product space.
ComplexMatrix electron_axis_op(const SpinSystem& sys, const Vector3& axis) {
  const auto spins = product_space_spins(sys);
  ComplexMatrix op = axis[0] * spins[0][0] + axis[1] * spins[0][1] + axis[2] * spins[0][2];
  return op;
}

struct MomentOps {
  ComplexMatrix m1, m2;
  bool average = false;
};

MomentOps moment_ops(const SpinSystem& sys, const Vector3& b, MwPolarization pol) {
  const auto axes = mw_axes(b);
  MomentOps ops;
  ops.m1 = electron_axis_op(sys, axes[0]);
  ops.average = (pol == MwPolarization::average);
  if (ops.average) ops.m2 = electron_axis_op(sys, axes[1]);
  return ops;
}

double moment_sq(const MomentOps& ops, const ComplexMatrix& vecs, int i, int j) {
  const std::complex<double> e1 = (vecs.col(j).adjoint() * ops.m1 * vecs.col(i))(0, 0);
  double m = std::norm(e1);
  if (ops.average) {
    const std::complex<double> e2 = (vecs.col(j).adjoint() * ops.m2 * vecs.col(i))(0, 0);
    m = 0.5 * (m + std::norm(e2));
  }
  return m;
}

// Dominant lab-frame m_S of an eigenvector: expectation of b.S rounded to
// the nearest manifold label.
int ms_character(const ComplexMatrix& sb, const ComplexMatrix& vecs, int i) {
  const double exp_sb = ((vecs.col(i).adjoint() * sb * vecs.col(i))(0, 0)).real();
  return static_cast<int>(std::lround(std::clamp(exp_sb, -1.0, 1.0)));
}

}  // namespace

std::vector<Transition> transition_energies(const SpinSystem& sys, const FieldVector& field,
                                            MwPolarization pol) {
  const auto h = build_hamiltonian(sys, field);
  const auto eig = eigensolve(h);
  const auto ops = moment_ops(sys, field.direction, pol);

  std::vector<Transition> out;
  const int n = h.dimension;
  out.reserve(n * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      out.push_back({i, j, eig.eigenvalues[j] - eig.eigenvalues[i],
                     moment_sq(ops, eig.eigenvectors, i, j)});
  return out;
}

RootList resonance_fields_single(const SpinSystem& sys, double mw_freq_ghz,
                                 const Vector3& direction, std::array<double, 2> window_mt,
                                 const ResonanceOptions& opt) {
  RootList result;
  if (window_mt[1] <= window_mt[0]) return result;
  const double nu = mw_freq_ghz * 1e3;  // MHz
  const Vector3 b = direction.normalized();
  const int dim = sys.hilbert_dimension();
  const int npairs = dim * (dim - 1) / 2;

  auto gaps_at = [&](double bmag) {
    const auto eig = eigensolve(build_hamiltonian(sys, FieldVector(bmag, b)));
    RealVector g(npairs);
    int p = 0;
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) g[p++] = eig.eigenvalues[j] - eig.eigenvalues[i];
    return g;
  };

  const int ng = opt.grid_points;
  const double db = (window_mt[1] - window_mt[0]) / (ng - 1);
  std::vector<RealVector> grid(ng);
  for (int k = 0; k < ng; ++k) grid[k] = gaps_at(window_mt[0] + k * db);

  const ComplexMatrix sb = electron_axis_op(sys, b);
  const auto ops = moment_ops(sys, b, opt.polarization);

  int p = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j, ++p) {
      double last_root = std::numeric_limits<double>::quiet_NaN();
      for (int k = 0; k + 1 < ng; ++k) {
        const double fa = grid[k][p] - nu, fb = grid[k + 1][p] - nu;
        if (fa == 0.0 || fa * fb < 0.0) {
          double lo = window_mt[0] + k * db, hi = lo + db, flo = fa;
          for (int it = 0; it < opt.max_bisections; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = gaps_at(mid)[p] - nu;
            if (std::abs(fm) < 1e-4) {
              lo = hi = mid;
              break;
            }
            if (flo * fm <= 0.0)
              hi = mid;
            else {
              lo = mid;
              flo = fm;
            }
          }
          const double root = 0.5 * (lo + hi);
          if (!std::isnan(last_root) && std::abs(root - last_root) < 2.0 * db)
            result.warnings.push_back("GridTooCoarse: close roots near " +
                                      std::to_string(root) + " mT");
          last_root = root;

          const auto eig = eigensolve(build_hamiltonian(sys, FieldVector(root, b)));
          RootFind rf;
          rf.i = i;
          rf.j = j;
          rf.field_mt = root;
          rf.intensity = moment_sq(ops, eig.eigenvectors, i, j);
          rf.lower_ms = ms_character(sb, eig.eigenvectors, i);
          rf.upper_ms = ms_character(sb, eig.eigenvectors, j);
          result.roots.push_back(rf);
        }
      }
    }
  }

  // Suppress numerically-forbidden lines relative to the strongest root.
  double imax = 0.0;
  for (const auto& r : result.roots) imax = std::max(imax, r.intensity);
  if (imax > 0.0) {
    std::erase_if(result.roots, [&](const RootFind& r) {
      return r.intensity < opt.intensity_rel_threshold * imax;
    });
  }
  std::sort(result.roots.begin(), result.roots.end(),
            [](const RootFind& a, const RootFind& b) { return a.field_mt < b.field_mt; });
  return result;
}

double branch_resonance_field(const SpinSystem& sys, double mw_freq_ghz,
                              const Vector3& direction, Branch branch, double guess_mt) {
  const double nu = mw_freq_ghz * 1e3;
  const Vector3 dir = direction.normalized();
  auto gap = [&](double bmag) {
    const auto eig = eigensolve(build_hamiltonian(sys, FieldVector(bmag, dir)));
    const int n = static_cast<int>(eig.eigenvalues.size());
    const int third = n / 3;
    return branch == Branch::minus ? eig.eigenvalues[third] - eig.eigenvalues[0]
                                   : eig.eigenvalues[n - 1] - eig.eigenvalues[n - 1 - third];
  };
  auto f = [&](double b) { return gap(b) - nu; };
  double step = 2.0;
  double lo = std::max(1.0, guess_mt - step), hi = guess_mt + step;
  double flo = f(lo), fhi = f(hi);
  for (int k = 0; k < 24 && flo * fhi > 0; ++k) {
    step *= 1.6;
    lo = std::max(1.0, lo - step);
    hi += step;
    flo = f(lo);
    fhi = f(hi);
  }
  if (flo * fhi > 0)
    throw NonConvergenceError("branch_resonance_field: no bracket near " +
                              std::to_string(guess_mt) + " mT");
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) < 1e-5) return mid;
    if (flo * fm <= 0)
      hi = mid;
    else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

std::array<int, 4> site_order(const Vector3& direction) {
  const Vector3 b = direction.normalized();
  std::array<int, 4> order{0, 1, 2, 3};
  const auto& axes = nv_site_axes();
  std::array<double, 4> angle{};
  for (int i = 0; i < 4; ++i)
    angle[i] = std::acos(std::clamp(std::abs(axes[i].dot(b)), 0.0, 1.0));
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int c) { return angle[a] > angle[c] + 1e-12; });
  return order;
}

StickSpectrum stick_spectrum(const SpinSystem& sys, double mw_freq_ghz,
                             const Vector3& nominal_axis, const EulerAngles& euler,
                             const std::array<PopulationSet, 4>& populations,
                             std::array<double, 2> window_mt, const ResonanceOptions& opt) {
  StickSpectrum spec;
  spec.mw_frequency_ghz = mw_freq_ghz;
  spec.orientation = euler;

  const Vector3 dir = rotate_field(nominal_axis, euler);
  const auto order = site_order(dir);

  for (int rank = 0; rank < 4; ++rank) {
    const SpinSystem s = site_system(sys, order[rank]);
    auto found = resonance_fields_single(s, mw_freq_ghz, dir, window_mt, opt);
    for (auto& w : found.warnings) spec.warnings.push_back(std::move(w));
    const auto& pop = populations[rank];
    for (const auto& r : found.roots) {
      Branch branch;
      if (r.lower_ms == -1 && r.upper_ms == 0)
        branch = Branch::minus;
      else if (r.lower_ms == 0 && r.upper_ms == +1)
        branch = Branch::plus;
      else {
        spec.warnings.push_back("unlabeled transition (m_S " + std::to_string(r.lower_ms) +
                                " -> " + std::to_string(r.upper_ms) + ") at " +
                                std::to_string(r.field_mt) + " mT dropped");
        continue;
      }
      auto pop_of = [&](int ms) {
        return ms == -1 ? pop.p_minus : (ms == 0 ? pop.p_zero : pop.p_plus);
      };
      ResonanceLine line;
      line.label = TransitionLabel{rank + 1, branch};
      line.field_mt = r.field_mt;
      line.intensity = r.intensity;
      line.signed_amplitude = r.intensity * (pop_of(r.lower_ms) - pop_of(r.upper_ms));
      spec.lines.push_back(line);
    }
  }
  std::sort(spec.lines.begin(), spec.lines.end(),
            [](const ResonanceLine& a, const ResonanceLine& b) { return a.field_mt < b.field_mt; });
  return spec;
}

SampledCurve broaden(const StickSpectrum& spec, std::array<double, 2> window_mt,
                     double linewidth_mt, int n_points) {
  if (linewidth_mt <= 0.0) throw std::invalid_argument("broaden: linewidth must be positive");
  SampledCurve out;
  out.field_mt.resize(n_points);
  out.amplitude = RealVector::Zero(n_points);
  const double db = (window_mt[1] - window_mt[0]) / (n_points - 1);
  const double norm = 1.0 / (linewidth_mt * std::sqrt(2.0 * M_PI));
  for (int k = 0; k < n_points; ++k) {
    const double b = window_mt[0] + k * db;
    out.field_mt[k] = b;
    double a = 0.0;
    for (const auto& line : spec.lines) {
      const double u = (b - line.field_mt) / linewidth_mt;
      a += line.signed_amplitude * norm * std::exp(-0.5 * u * u);
    }
    out.amplitude[k] = a;
  }
  return out;
}

}  // namespace nvespin::spectra
