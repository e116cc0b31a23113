#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "nvespin/eseem.hpp"
#include "nvespin/types.hpp"

namespace nvespin::sigproc {

// Hahn-echo decay record: amplitude versus total evolution time 2 tau.
struct EchoDecay {
  RealVector two_tau_us;
  RealVector amplitude;
  double temperature_k = 0.0;
  std::string label;
};

// Stretched-exponential fit V(2tau) = A exp(-(2tau/T2)^n).
struct StretchedExpFit {
  double amplitude = 0.0;
  double t2_ms = 0.0;
  double n = 1.0;
  double residual_norm = 0.0;
  double sigma_amplitude = 0.0, sigma_t2_ms = 0.0, sigma_n = 0.0;
  bool converged = false;
  int iterations = 0;
};

inline constexpr double kStretchMin = 0.5;
inline constexpr double kStretchMax = 4.0;

StretchedExpFit fit_stretched_exponential(const EchoDecay& decay,
                                          std::optional<std::array<double, 3>> initial = {});

// Pointwise division of a modulated decay by the fitted relaxation envelope.
eseem::EseemTrace normalize_by_decay(const RealVector& tau_us, const RealVector& amplitude,
                                     const StretchedExpFit& fit);

enum class Window { none, hamming };

// Cosine FT spectrum. The complex spectrum is kept so the first-order phase
// correction can be applied as a separate step; `amplitude` is its real part.
struct FtSpectrum {
  RealVector freq_mhz;                         // uniform, 0 .. Nyquist
  RealVector amplitude;
  std::vector<std::complex<double>> complex_amp;
  double dead_time_us = 0.0;
  double start_time_us = 0.0;  // tau of the first retained sample
  int zero_fill = 1;
  double bin_width_mhz = 0.0;
  bool phase_corrected = false;
};

// Drops samples with tau < dead_time, subtracts the mean, applies the window,
// zero-fills by `zero_fill` (rounded up to a power-of-two transform length)
// and evaluates the complex FT with the e^{+i 2 pi nu t} kernel.
FtSpectrum cosine_ft(const eseem::EseemTrace& trace, double dead_time_us, int zero_fill,
                     Window window);

// Multiplies each bin by e^{+i 2 pi nu t0} and takes the real part,
// compensating the phase skew of a record starting at t0 instead of 0.
FtSpectrum phase_correct_first_order(const FtSpectrum& spec, double t0_us);

// Boxcar convolution with the detector integration window (sinc attenuation
// in frequency); width is quantized to the tau step.
eseem::EseemTrace detection_bandwidth_filter(const eseem::EseemTrace& trace,
                                             double integration_window_ns);

struct Peak {
  double freq_mhz = 0.0;
  double amplitude = 0.0;  // signed
  double width_mhz = 0.0;  // FWHM estimate from the local parabola
};
using PeakList = std::vector<Peak>;

// Local extrema with |amplitude| above floor * max|amplitude|, refined by
// three-point parabolic interpolation. Sorted by frequency.
PeakList pick_peaks(const FtSpectrum& spec, double floor_frac);

struct AdditiveTriple {
  int i = 0, j = 0, k = 0;  // indices into the peak list, nu_i + nu_j = nu_k
  double mismatch_mhz = 0.0;
};

// All index triples satisfying nu_i + nu_j = nu_k within the tolerance.
std::vector<AdditiveTriple> check_additive_relation(const PeakList& peaks, double tol_mhz);

}  // namespace nvespin::sigproc
