#include "nvespin/sigproc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nvespin/lsq.hpp"

namespace nvespin::sigproc {

namespace {

// Iterative radix-2 FFT, kernel e^{-i 2 pi k n / N}; N must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

StretchedExpFit fit_stretched_exponential(const EchoDecay& decay,
                                          std::optional<std::array<double, 3>> initial) {
  const Eigen::Index m = decay.two_tau_us.size();
  if (m != decay.amplitude.size())
    throw std::invalid_argument("fit_stretched_exponential: length mismatch");
  if (m < 8) throw std::invalid_argument("fit_stretched_exponential: need >= 8 points");
  if (decay.amplitude.maxCoeff() <= 0.0)
    throw DegenerateDataError("fit_stretched_exponential: amplitude non-positive throughout");

  RealVector t_ms = decay.two_tau_us / 1000.0;
  const RealVector& y = decay.amplitude;

  RealVector x0(3);
  if (initial) {
    x0 << (*initial)[0], (*initial)[1], (*initial)[2];
  } else {
    // log-log linear regression: ln(-ln(y/A)) = n ln t - n ln T2.
    const double a0 = y.maxCoeff();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double r = y[i] / a0;
      if (r <= 1e-6 || r >= 0.999 || t_ms[i] <= 0) continue;
      const double lx = std::log(t_ms[i]);
      const double ly = std::log(-std::log(r));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++cnt;
    }
    double n0 = 1.0, t20 = t_ms[m / 2];
    if (cnt >= 2 && std::abs(cnt * sxx - sx * sx) > 1e-12) {
      n0 = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
      const double c = (sy - n0 * sx) / cnt;  // -n ln T2
      n0 = std::clamp(n0, kStretchMin, kStretchMax);
      t20 = std::exp(-c / n0);
    }
    x0 << a0, t20, n0;
  }

  auto model = [&](const RealVector& p, Eigen::Index i) {
    const double u = std::pow(t_ms[i] / p[1], p[2]);
    return p[0] * std::exp(-u);
  };
  lsq::ResidualFn residuals = [&](const RealVector& p) {
    RealVector r(m);
    for (Eigen::Index i = 0; i < m; ++i) r[i] = model(p, i) - y[i];
    return r;
  };
  lsq::JacobianFn jacobian = [&](const RealVector& p) {
    Eigen::MatrixXd j(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double ratio = t_ms[i] / p[1];
      const double u = std::pow(ratio, p[2]);
      const double f = std::exp(-u);
      j(i, 0) = f;
      j(i, 1) = p[0] * f * u * p[2] / p[1];
      j(i, 2) = (u > 0) ? -p[0] * f * u * std::log(ratio) : 0.0;
    }
    return j;
  };

  lsq::Options opt;
  opt.max_iterations = 500;
  opt.lower = RealVector(3);
  *opt.lower << 1e-12, 1e-9, kStretchMin;
  opt.upper = RealVector(3);
  *opt.upper << 1e12, 1e12, kStretchMax;
  const auto res = lsq::levenberg_marquardt(residuals, jacobian, x0, opt);
  if (!res.converged)
    throw NonConvergenceError("fit_stretched_exponential: no convergence after " +
                              std::to_string(res.iterations) + " iterations");

  StretchedExpFit fit;
  fit.amplitude = res.params[0];
  fit.t2_ms = res.params[1];
  fit.n = res.params[2];
  fit.residual_norm = res.residual_norm;
  fit.sigma_amplitude = res.sigma[0];
  fit.sigma_t2_ms = res.sigma[1];
  fit.sigma_n = res.sigma[2];
  fit.converged = true;
  fit.iterations = res.iterations;
  return fit;
}

eseem::EseemTrace normalize_by_decay(const RealVector& tau_us, const RealVector& amplitude,
                                     const StretchedExpFit& fit) {
  if (tau_us.size() != amplitude.size())
    throw std::invalid_argument("normalize_by_decay: length mismatch");
  eseem::EseemTrace out;
  out.tau_us = tau_us;
  out.v.resize(tau_us.size());
  for (Eigen::Index i = 0; i < tau_us.size(); ++i) {
    const double two_tau_ms = 2.0 * tau_us[i] / 1000.0;
    const double env = fit.amplitude * std::exp(-std::pow(two_tau_ms / fit.t2_ms, fit.n));
    out.v[i] = amplitude[i] / env;
  }
  return out;
}

FtSpectrum cosine_ft(const eseem::EseemTrace& trace, double dead_time_us, int zero_fill,
                     Window window) {
  if (dead_time_us < 0) throw std::invalid_argument("cosine_ft: dead time must be >= 0");
  if (zero_fill < 1) throw std::invalid_argument("cosine_ft: zero_fill must be >= 1");
  const Eigen::Index n_all = trace.tau_us.size();
  if (n_all < 2) throw std::invalid_argument("cosine_ft: trace too short");
  const double dt = trace.tau_us[1] - trace.tau_us[0];

  Eigen::Index first = 0;
  while (first < n_all && trace.tau_us[first] < dead_time_us) ++first;
  const Eigen::Index n = n_all - first;
  if (n < 2) throw EmptyAfterDeadTimeError("cosine_ft: no samples after dead time");

  std::vector<double> y(n);
  double mean = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) mean += trace.v[first + i];
  mean /= static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = trace.v[first + i] - mean;

  if (window == Window::hamming) {
    for (Eigen::Index i = 0; i < n; ++i)
      y[i] *= 0.54 - 0.46 * std::cos(2.0 * M_PI * i / static_cast<double>(n - 1));
    // remove the windowed residual so the DC bin is exactly zero
    double wm = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    for (auto& v : y) v -= wm;
  }

  const size_t n_fft = next_pow2(static_cast<size_t>(n) * static_cast<size_t>(zero_fill));
  std::vector<std::complex<double>> buf(n_fft, {0.0, 0.0});
  for (Eigen::Index i = 0; i < n; ++i) buf[i] = y[i];
  fft_pow2(buf);

  FtSpectrum spec;
  spec.dead_time_us = dead_time_us;
  spec.start_time_us = trace.tau_us[first];
  spec.zero_fill = zero_fill;
  spec.bin_width_mhz = 1.0 / (static_cast<double>(n_fft) * dt);
  const size_t nkeep = n_fft / 2 + 1;
  spec.freq_mhz.resize(nkeep);
  spec.amplitude.resize(nkeep);
  spec.complex_amp.resize(nkeep);
  for (size_t k = 0; k < nkeep; ++k) {
    spec.freq_mhz[k] = static_cast<double>(k) * spec.bin_width_mhz;
    // conjugate converts the e^{-i} FFT kernel to the e^{+i 2 pi nu t} one
    spec.complex_amp[k] = std::conj(buf[k]);
    spec.amplitude[k] = spec.complex_amp[k].real();
  }
  return spec;
}

FtSpectrum phase_correct_first_order(const FtSpectrum& spec, double t0_us) {
  FtSpectrum out = spec;
  for (size_t k = 0; k < out.complex_amp.size(); ++k) {
    out.complex_amp[k] *= std::polar(1.0, 2.0 * M_PI * out.freq_mhz[k] * t0_us);
    out.amplitude[k] = out.complex_amp[k].real();
  }
  out.phase_corrected = true;
  return out;
}

eseem::EseemTrace detection_bandwidth_filter(const eseem::EseemTrace& trace,
                                             double integration_window_ns) {
  if (integration_window_ns <= 0)
    throw std::invalid_argument("detection_bandwidth_filter: window must be positive");
  const Eigen::Index n = trace.tau_us.size();
  eseem::EseemTrace out = trace;
  if (n < 2) return out;
  const double dt_us = trace.tau_us[1] - trace.tau_us[0];
  // boxcar width quantized to an odd sample count
  long m = std::lround(integration_window_ns * 1e-3 / dt_us);
  if (m % 2 == 0) ++m;
  if (m <= 1) return out;
  const long h = m / 2;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - h);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + h);
    double acc = 0.0;
    for (Eigen::Index k = lo; k <= hi; ++k) acc += trace.v[k];
    out.v[i] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

PeakList pick_peaks(const FtSpectrum& spec, double floor_frac) {
  if (floor_frac <= 0.0 || floor_frac >= 1.0)
    throw std::invalid_argument("pick_peaks: floor must be in (0,1)");
  PeakList peaks;
  const auto& a = spec.amplitude;
  const Eigen::Index n = a.size();
  if (n < 3) return peaks;
  const double floor_abs = floor_frac * a.cwiseAbs().maxCoeff();
  const double dv = spec.bin_width_mhz;

  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const bool is_max = a[i] > a[i - 1] && a[i] >= a[i + 1] && a[i] > floor_abs;
    const bool is_min = a[i] < a[i - 1] && a[i] <= a[i + 1] && a[i] < -floor_abs;
    if (!is_max && !is_min) continue;
    const double d2 = a[i - 1] - 2.0 * a[i] + a[i + 1];
    double delta = 0.0, amp = a[i];
    if (std::abs(d2) > 1e-300) {
      delta = 0.5 * (a[i - 1] - a[i + 1]) / d2;
      delta = std::clamp(delta, -0.5, 0.5);
      amp = a[i] - 0.25 * (a[i - 1] - a[i + 1]) * delta;
    }
    Peak p;
    p.freq_mhz = spec.freq_mhz[i] + delta * dv;
    p.amplitude = amp;
    p.width_mhz = (std::abs(d2) > 1e-300) ? 2.0 * dv * std::sqrt(std::abs(amp / d2)) : 0.0;
    peaks.push_back(p);
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& x, const Peak& y) { return x.freq_mhz < y.freq_mhz; });
  return peaks;
}

std::vector<AdditiveTriple> check_additive_relation(const PeakList& peaks, double tol_mhz) {
  std::vector<AdditiveTriple> out;
  const int n = static_cast<int>(peaks.size());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const double mis = peaks[i].freq_mhz + peaks[j].freq_mhz - peaks[k].freq_mhz;
        if (std::abs(mis) <= tol_mhz) out.push_back({i, j, k, mis});
      }
  return out;
}

}  // namespace nvespin::sigproc
