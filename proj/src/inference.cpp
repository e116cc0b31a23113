#include "nvespin/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nvespin/constants.hpp"
#include "nvespin/lsq.hpp"

namespace nvespin::infer {

OrientationFit fit_orientation(const std::vector<MeasuredPeak>& measured, const SpinSystem& sys,
                               double mw_freq_ghz, const Vector3& nominal_axis) {
  if (measured.size() < 4)
    throw UnderDeterminedError("fit_orientation: need >= 4 labeled peaks");
  const Vector3 nominal = nominal_axis.normalized();

  // Warm-started per-peak roots make each objective evaluation cheap.
  std::vector<double> guess(measured.size());
  for (size_t k = 0; k < measured.size(); ++k) guess[k] = measured[k].field_mt;

  lsq::ResidualFn residuals = [&](const RealVector& ab) {
    const EulerAngles e{ab[0], ab[1], 0.0};
    const Vector3 dir = rotate_field(nominal, e);
    const auto order = spectra::site_order(dir);
    RealVector r(measured.size());
    for (size_t k = 0; k < measured.size(); ++k) {
      const auto& mp = measured[k];
      const SpinSystem s = site_system(sys, order[mp.label.site - 1]);
      const double b =
          spectra::branch_resonance_field(s, mw_freq_ghz, dir, mp.label.branch, guess[k]);
      guess[k] = b;
      r[k] = b - mp.field_mt;
    }
    return r;
  };

  lsq::Options opt;
  opt.max_iterations = 200;
  opt.fd_steps = RealVector(2);
  opt.fd_steps << 5e-4, 5e-4;  // degrees
  opt.lower = RealVector(2);
  *opt.lower << -360.0, 0.0;
  opt.upper = RealVector(2);
  *opt.upper << 720.0, 90.0;

  std::vector<std::array<double, 2>> starts = {{0.1, 0.1}};
  for (double beta : {2.0, 8.0})
    for (double alpha : {22.5, 112.5, 202.5, 292.5}) starts.push_back({alpha, beta});

  OrientationFit best;
  double best_ssr = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    RealVector x0(2);
    x0 << s[0], s[1];
    for (size_t k = 0; k < measured.size(); ++k) guess[k] = measured[k].field_mt;
    lsq::Result r;
    try {
      r = lsq::levenberg_marquardt(residuals, nullptr, x0, opt);
    } catch (const NonConvergenceError&) {
      best.start_log.push_back("start (" + std::to_string(s[0]) + ", " + std::to_string(s[1]) +
                               "): bracket failure, skipped");
      continue;
    }
    const double ssr = r.residual_norm * r.residual_norm;
    best.start_log.push_back("start (" + std::to_string(s[0]) + ", " + std::to_string(s[1]) +
                             ") -> (" + std::to_string(r.params[0]) + ", " +
                             std::to_string(r.params[1]) + "), rms " +
                             std::to_string(std::sqrt(ssr / measured.size())) + " mT");
    if (ssr < best_ssr) {
      best_ssr = ssr;
      double alpha = std::fmod(r.params[0], 360.0);
      if (alpha < 0) alpha += 360.0;
      best.euler = EulerAngles{alpha, r.params[1], 0.0};
      best.converged = r.converged;
      for (size_t k = 0; k < measured.size(); ++k) guess[k] = measured[k].field_mt;
      const RealVector rv = residuals(r.params);
      best.per_peak_residual_mt.assign(rv.data(), rv.data() + rv.size());
      best.residual_rms_mt = std::sqrt(ssr / measured.size());
    }
  }
  if (!std::isfinite(best_ssr))
    throw NonConvergenceError("fit_orientation: all starts failed");
  return best;
}

namespace {

SpinSystem with_couplings(const SpinSystem& tmpl, const Vector3& axis, double a_par,
                          double a_perp, double p_par) {
  SpinSystem s = tmpl;
  if (s.nuclei.empty()) throw std::invalid_argument("fit_nitrogen_couplings: no nucleus");
  s.nuclei[0].hyperfine = AxialTensor(a_par, a_perp, axis);
  s.nuclei[0].quadrupole = AxialTensor::quadrupole_from_p(p_par, axis);
  return s;
}

RealVector coupling_residuals(const std::vector<OrientationDataset>& data,
                              const SpinSystem& tmpl, const RealVector& p) {
  std::vector<double> r;
  for (const auto& d : data) {
    const SpinSystem s = with_couplings(tmpl, d.selection.site_axis, p[0], p[1], p[2]);
    const auto nf = eseem::nuclear_frequencies(s, d.field, d.selection);
    if (nf.freqs_a.size() != d.freqs_a.size() || nf.freqs_b.size() != d.freqs_b.size())
      throw std::invalid_argument("fit_nitrogen_couplings: frequency count mismatch");
    for (size_t i = 0; i < nf.freqs_a.size(); ++i) r.push_back(nf.freqs_a[i] - d.freqs_a[i]);
    for (size_t i = 0; i < nf.freqs_b.size(); ++i) r.push_back(nf.freqs_b[i] - d.freqs_b[i]);
  }
  return Eigen::Map<RealVector>(r.data(), static_cast<Eigen::Index>(r.size()));
}

}  // namespace

CouplingFit fit_nitrogen_couplings(const std::vector<OrientationDataset>& data,
                                   const SpinSystem& sys_template,
                                   std::array<double, 3> initial) {
  size_t n_freqs = 0;
  for (const auto& d : data) n_freqs += d.freqs_a.size() + d.freqs_b.size();
  if (data.size() < 2 || n_freqs < 6)
    throw UnderDeterminedError("fit_nitrogen_couplings: need >= 2 orientations, >= 6 peaks");

  lsq::Options opt;
  opt.max_iterations = 200;
  opt.fd_steps = RealVector(3);
  opt.fd_steps << 1e-5, 1e-5, 1e-5;

  auto solve = [&](const std::vector<OrientationDataset>& ds, const RealVector& x0) {
    lsq::ResidualFn fn = [&](const RealVector& p) {
      return coupling_residuals(ds, sys_template, p);
    };
    return lsq::levenberg_marquardt(fn, nullptr, x0, opt);
  };

  RealVector x0(3);
  x0 << initial[0], initial[1], initial[2];
  const auto res = solve(data, x0);
  if (!res.converged) throw NonConvergenceError("fit_nitrogen_couplings: no convergence");

  {
    lsq::ResidualFn fn = [&](const RealVector& p) {
      return coupling_residuals(data, sys_template, p);
    };
    const Eigen::MatrixXd j = lsq::numeric_jacobian(fn, res.params, opt.fd_steps);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
    const auto& sv = svd.singularValues();
    if (sv[sv.size() - 1] < 1e-10 * sv[0])
      throw RankDeficientError("fit_nitrogen_couplings: sensitivity matrix singular");
  }

  // Orientation-error propagation: tilt each dataset's field direction by
  // +-0.1 degree about two orthogonal axes and re-fit from the optimum.
  RealVector orient_var = RealVector::Zero(3);
  for (size_t di = 0; di < data.size(); ++di) {
    const Vector3 b = data[di].field.direction;
    Vector3 t1 = b.cross(Vector3::UnitZ());
    if (t1.norm() < 1e-8) t1 = b.cross(Vector3::UnitX());
    t1.normalize();
    const Vector3 t2 = b.cross(t1).normalized();
    for (const Vector3& ax : {t1, t2}) {
      RealVector dp = RealVector::Zero(3);
      for (double sign : {+1.0, -1.0}) {
        auto pert = data;
        const Eigen::AngleAxisd rot(sign * 0.1 * M_PI / 180.0, ax);
        pert[di].field.direction = (rot * b).normalized();
        const auto pres = solve(pert, res.params);
        dp += sign * (pres.params - res.params);
      }
      dp /= 2.0;
      orient_var += dp.cwiseProduct(dp);
    }
  }

  CouplingFit fit;
  fit.a_par_mhz = res.params[0];
  fit.a_perp_mhz = res.params[1];
  fit.p_par_mhz = res.params[2];
  fit.sigma_a_par = std::sqrt(res.sigma[0] * res.sigma[0] + orient_var[0]);
  fit.sigma_a_perp = std::sqrt(res.sigma[1] * res.sigma[1] + orient_var[1]);
  fit.sigma_p_par = std::sqrt(res.sigma[2] * res.sigma[2] + orient_var[2]);
  fit.residual_rms_mhz = res.residual_norm / std::sqrt(static_cast<double>(n_freqs));
  fit.converged = true;
  return fit;
}

std::vector<SignAmbiguousCoupling> extract_c13_coupling(const sigproc::PeakList& peaks,
                                                        double field_mt, int manifold,
                                                        double anchor_tol_mhz) {
  if (manifold != +1 && manifold != -1)
    throw std::invalid_argument("extract_c13_coupling: manifold must be +1 or -1");
  const double nu_i = constants::larmor_mhz(constants::g_n_13c, field_mt);

  int anchor = -1;
  double best = anchor_tol_mhz;
  for (size_t k = 0; k < peaks.size(); ++k) {
    const double d = std::abs(peaks[k].freq_mhz - nu_i);
    if (d <= best) {
      best = d;
      anchor = static_cast<int>(k);
    }
  }
  if (anchor < 0)
    throw NoLarmorAnchorError("extract_c13_coupling: no peak at the 13C Larmor frequency " +
                              std::to_string(nu_i) + " MHz");

  std::vector<SignAmbiguousCoupling> out;
  for (size_t k = 0; k < peaks.size(); ++k) {
    if (static_cast<int>(k) == anchor || peaks[k].amplitude < 0) continue;
    const double nu = peaks[k].freq_mhz;
    SignAmbiguousCoupling c;
    c.peak_mhz = nu;
    // nu_+ = |nu_I - A| (m_S = +1) and nu_- = |nu_I + A| (m_S = -1)
    if (manifold == +1)
      c.candidates = {nu_i - nu, nu_i + nu};
    else
      c.candidates = {nu - nu_i, -(nu + nu_i)};
    out.push_back(c);
  }
  return out;
}

// ----------------------------------------------------------- fluctuator model

namespace {

// f(x) = 2x - 3 + 4 e^{-x} - e^{-2x}, series-guarded for small x.
double ou_f(double x) {
  if (x < 1e-3) {
    const double x3 = x * x * x;
    return (2.0 / 3.0) * x3 - 0.5 * x3 * x + (7.0 / 30.0) * x3 * x * x;
  }
  if (x > 700.0) return 2.0 * x - 3.0;
  return 2.0 * x - 3.0 + 4.0 * std::exp(-x) - std::exp(-2.0 * x);
}

}  // namespace

double ou_echo_envelope(double delta_mrad_s, double tau_c_s, double two_tau_s) {
  if (delta_mrad_s <= 0 || tau_c_s <= 0 || two_tau_s <= 0)
    throw std::invalid_argument("ou_echo_envelope: arguments must be positive");
  const double delta = delta_mrad_s * 1e6;  // rad/s
  const double x = 0.5 * two_tau_s / tau_c_s;
  const double ln_v = -delta * delta * tau_c_s * tau_c_s * ou_f(x);
  return std::exp(ln_v);
}

double fluctuator_rate(double delta_mrad_s, double tau_c_s) {
  if (!(tau_c_s > 0) || !std::isfinite(tau_c_s)) return 0.0;
  const double delta = delta_mrad_s * 1e6;
  // solve delta^2 tau_c^2 f(t/(2 tau_c)) = 1 for the 1/e time t
  auto g = [&](double lt) {
    return std::log(delta * delta * tau_c_s * tau_c_s *
                    std::max(ou_f(std::exp(lt) / (2.0 * tau_c_s)), 1e-300));
  };
  double lo = std::log(1e-15), hi = std::log(1e9);
  if (g(hi) < 0) return 0.0;    // envelope never reaches 1/e
  if (g(lo) > 0) return 1e15;   // immediate decay
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0)
      lo = mid;
    else
      hi = mid;
  }
  return 1.0 / std::exp(0.5 * (lo + hi));
}

double t2_of_temperature(const FluctuatorModel& m, double temperature_k) {
  const double arg = m.e_a_mev / (constants::boltzmann_mev_per_k * temperature_k);
  const double tau_c = (arg > 690.0) ? std::numeric_limits<double>::infinity()
                                     : m.tau0_s * std::exp(arg);
  const double gamma = std::isfinite(tau_c) ? fluctuator_rate(m.delta_mrad_s, tau_c) : 0.0;
  return 1.0 / (1.0 / (m.t2_bath_ms * 1e-3) + gamma) * 1e3;
}

FluctuatorModel fit_t2_temperature(const std::vector<std::array<double, 2>>& data,
                                   const FluctuatorModel& initial) {
  if (data.size() < 5) throw UnderDeterminedError("fit_t2_temperature: need >= 5 points");
  auto sorted = data;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });

  double t2min = sorted[0][1], t2max = sorted[0][1];
  size_t imin = 0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i][1] < t2min) {
      t2min = sorted[i][1];
      imin = i;
    }
    t2max = std::max(t2max, sorted[i][1]);
  }
  const bool significant_dip = (t2max - t2min) / t2max > 0.1;
  if (significant_dip && (imin == 0 || imin == sorted.size() - 1))
    throw MinimumNotBracketedError("fit_t2_temperature: T2 minimum at a data endpoint");

  lsq::ResidualFn fn = [&](const RealVector& p) {
    FluctuatorModel m;
    m.e_a_mev = std::exp(p[0]);
    m.tau0_s = std::exp(p[1]);
    m.delta_mrad_s = std::exp(p[2]);
    m.t2_bath_ms = std::exp(p[3]);
    RealVector r(sorted.size());
    for (size_t i = 0; i < sorted.size(); ++i)
      r[static_cast<Eigen::Index>(i)] = t2_of_temperature(m, sorted[i][0]) - sorted[i][1];
    return r;
  };

  RealVector x0(4);
  x0 << std::log(initial.e_a_mev), std::log(initial.tau0_s), std::log(initial.delta_mrad_s),
      std::log(initial.t2_bath_ms);
  lsq::Options opt;
  opt.max_iterations = 500;
  opt.fd_steps = RealVector::Constant(4, 1e-5);
  const auto res = lsq::levenberg_marquardt(fn, nullptr, x0, opt);
  if (!res.converged) throw NonConvergenceError("fit_t2_temperature: no convergence");

  FluctuatorModel fit;
  fit.e_a_mev = std::exp(res.params[0]);
  fit.tau0_s = std::exp(res.params[1]);
  fit.delta_mrad_s = std::exp(res.params[2]);
  fit.t2_bath_ms = std::exp(res.params[3]);
  fit.converged = true;
  fit.residual_rms_ms = res.residual_norm / std::sqrt(static_cast<double>(sorted.size()));

  // Density comparable to the paper's fluctuator estimate, through the same
  // dipolar conversion as mean_dipolar_coupling (order of magnitude only).
  const double nu_khz = fit.delta_mrad_s * 1e6 / (2.0 * M_PI) / 1e3;
  fit.density_cm3 = nu_khz / (constants::dilute_dipolar_prefactor *
                              constants::dipolar_hz_m3 * 1e3);

  // E_a is unidentifiable when the fluctuator term never matters on the data.
  double max_rel = 0.0;
  for (const auto& d : sorted) {
    const double t2 = t2_of_temperature(fit, d[0]);
    max_rel = std::max(max_rel, std::abs(fit.t2_bath_ms - t2) / fit.t2_bath_ms);
  }
  fit.ea_identifiable = max_rel > 1e-3;
  return fit;
}

double ppm_to_cm3(double ppm) { return ppm * 1e-6 * constants::diamond_atom_density_cm3; }

double mean_dipolar_coupling_khz(double concentration_cm3) {
  if (concentration_cm3 <= 0)
    throw std::invalid_argument("mean_dipolar_coupling: concentration must be positive");
  // nu = C * (mu0/4pi) g^2 muB^2 / h * n ; Hz m^3 * cm^-3 -> kHz carries 1e3
  return constants::dilute_dipolar_prefactor * constants::dipolar_hz_m3 * concentration_cm3 *
         1e3;
}

FlipFlopSuppression flip_flop_suppression(double coupling_khz, double linewidth_khz,
                                          double base_t2_ms) {
  if (!(coupling_khz > 0) || !(linewidth_khz > 0))
    throw std::invalid_argument("flip_flop_suppression: inputs must be positive");
  if (coupling_khz >= linewidth_khz)
    throw InvalidRegimeError("flip_flop_suppression: coupling must be below the linewidth");
  FlipFlopSuppression out;
  out.fraction = coupling_khz / linewidth_khz;
  out.base_t2_ms = base_t2_ms;
  out.corrected_t2_ms = base_t2_ms / out.fraction;
  return out;
}

}  // namespace nvespin::infer
