#pragma once

#include <array>
#include <string>
#include <vector>

#include "nvespin/hamiltonian.hpp"
#include "nvespin/rotations.hpp"

namespace nvespin::spectra {

// Branch of an ESR transition in laboratory-frame labels: minus = T- <-> T0,
// plus = T0 <-> T+.
enum class Branch { minus, plus };

inline const char* branch_name(Branch b) { return b == Branch::minus ? "minus" : "plus"; }

struct TransitionLabel {
  int site = 1;  // 1..4
  Branch branch = Branch::minus;
};

struct ResonanceLine {
  TransitionLabel label;
  double field_mt = 0.0;
  double intensity = 0.0;         // transition moment, >= 0
  double signed_amplitude = 0.0;  // intensity * (p_lower - p_upper)
};

// Non-thermal triplet populations after optical pumping; no normalization.
struct PopulationSet {
  double p_plus = 0.0;
  double p_zero = 0.0;
  double p_minus = 0.0;
};

struct StickSpectrum {
  std::vector<ResonanceLine> lines;
  double mw_frequency_ghz = 0.0;
  EulerAngles orientation;
  std::vector<std::string> warnings;
};

struct Transition {
  int i = 0, j = 0;        // eigenstate indices, i < j
  double delta_e_mhz = 0;  // E_j - E_i
  double moment_sq = 0;    // |<j|S_perp|i>|^2
};

// Microwave B1 handling: a deterministic single axis perpendicular to B0, or
// the average over two orthogonal perpendicular axes (removes the arbitrary
// choice; the resonator geometry is not modeled).
enum class MwPolarization { single_axis, average };

// All ordered eigenpair transitions with the electron transition moment along
// the microwave polarization axis.
std::vector<Transition> transition_energies(const SpinSystem& sys, const FieldVector& field,
                                            MwPolarization pol = MwPolarization::average);

struct ResonanceOptions {
  int grid_points = 2000;
  int max_bisections = 60;
  double intensity_rel_threshold = 1e-6;
  MwPolarization polarization = MwPolarization::average;
};

struct RootFind {
  int i = 0, j = 0;     // transition eigenindices at the root
  double field_mt = 0;
  double intensity = 0;
  int lower_ms = 0, upper_ms = 0;  // dominant lab-frame m_S of the two levels
};

// Resonance fields of one system (one site) for a given spectrometer
// frequency: sign-change bracketing of every eigenvalue-gap curve on a field
// grid, refined by bisection. Returns every root in the window; empty result
// means no resonance (not an error). Warnings flag suspected missed roots.
struct RootList {
  std::vector<RootFind> roots;
  std::vector<std::string> warnings;
};
RootList resonance_fields_single(const SpinSystem& sys, double mw_freq_ghz,
                                 const Vector3& direction, std::array<double, 2> window_mt,
                                 const ResonanceOptions& opt = {});

// Resonance field of one branch near a guess: expanding bracket around the
// guess, then bisection on the gap of the extreme electron levels (valid in
// the Zeeman-dominated regime where T- < T0 < T+). Used by the orientation
// fitter and for resolving "auto" field magnitudes.
double branch_resonance_field(const SpinSystem& sys, double mw_freq_ghz,
                              const Vector3& direction, Branch branch, double guess_mt);

// Site ordering convention: sites ranked by the angle between the site axis
// and B0 (folded to [0, 90], descending); ties by axis list order. With
// B0 near [110] this makes sites 1,2 the ~90 degree pair and 3,4 the ~35
// degree pair, matching the peak labels S_i^{+-}.
std::array<int, 4> site_order(const Vector3& direction);

// Eight-line NV spectrum over the four crystal sites with signed amplitudes
// from the per-site populations (index = convention site label - 1).
StickSpectrum stick_spectrum(const SpinSystem& sys, double mw_freq_ghz,
                             const Vector3& nominal_axis, const EulerAngles& euler,
                             const std::array<PopulationSet, 4>& populations,
                             std::array<double, 2> window_mt, const ResonanceOptions& opt = {});

struct SampledCurve {
  RealVector field_mt;
  RealVector amplitude;
};

// Sum of unit-area Gaussians of width (sigma) `linewidth_mt`, scaled by the
// signed amplitudes, sampled across the window.
SampledCurve broaden(const StickSpectrum& spec, std::array<double, 2> window_mt,
                     double linewidth_mt, int n_points = 2000);

}  // namespace nvespin::spectra
