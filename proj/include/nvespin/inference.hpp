#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nvespin/eseem.hpp"
#include "nvespin/sigproc.hpp"
#include "nvespin/spectra.hpp"

namespace nvespin::infer {

// ---------------------------------------------------------------- orientation

struct MeasuredPeak {
  spectra::TransitionLabel label;
  double field_mt = 0.0;
};

struct OrientationFit {
  EulerAngles euler;        // gamma fixed to 0 (degenerate for a field direction)
  double residual_rms_mt = 0.0;
  std::vector<double> per_peak_residual_mt;
  std::vector<std::string> start_log;  // one line per multi-start candidate
  bool converged = false;
};

// Fits the field misalignment Euler angles to labeled peak positions by
// multi-start local least squares over (alpha, beta).
OrientationFit fit_orientation(const std::vector<MeasuredPeak>& measured, const SpinSystem& sys,
                               double mw_freq_ghz, const Vector3& nominal_axis);

// ------------------------------------------------------------------ couplings

struct OrientationDataset {
  FieldVector field;
  eseem::TransitionSelection selection;
  std::vector<double> freqs_a, freqs_b;  // measured, MHz, ascending
};

struct CouplingFit {
  double a_par_mhz = 0.0, a_perp_mhz = 0.0, p_par_mhz = 0.0;
  double sigma_a_par = 0.0, sigma_a_perp = 0.0, sigma_p_par = 0.0;
  double residual_rms_mhz = 0.0;
  bool converged = false;
};

// Least squares over (A_par, A_perp, P_par) against labeled nuclear
// frequencies from two or more orientations, using the exact forward model.
// Uncertainties combine the statistical covariance with finite-difference
// sensitivity to +-0.1 degree orientation errors.
CouplingFit fit_nitrogen_couplings(const std::vector<OrientationDataset>& data,
                                   const SpinSystem& sys_template,
                                   std::array<double, 3> initial_apar_aperp_ppar);

// ----------------------------------------------------------------- 13C algebra

struct SignAmbiguousCoupling {
  double peak_mhz = 0.0;              // the shifted peak used
  std::array<double, 2> candidates{};  // both sign branches of nu = |nu_I -+ A|
};

// For each shifted peak, both couplings consistent with nu+- = |nu_I -+ A|.
// `manifold` is +1 for a T0<->T+ measurement (shifted peaks live in m_S=+1)
// and -1 for T-<->T0. Requires an anchor peak at the 13C Larmor frequency.
std::vector<SignAmbiguousCoupling> extract_c13_coupling(const sigproc::PeakList& peaks,
                                                        double field_mt, int manifold,
                                                        double anchor_tol_mhz = 0.05);

// ----------------------------------------------------------- fluctuator model

struct FluctuatorModel {
  double e_a_mev = 2.5;
  double tau0_s = 5e-5;       // attempt time
  double delta_mrad_s = 2.6e-3;  // OU coupling strength
  double t2_bath_ms = 0.7;
  double density_cm3 = 0.0;   // via the dipolar conversion, order of magnitude
  bool converged = false;
  bool ea_identifiable = true;
  double residual_rms_ms = 0.0;
};

// Ornstein-Uhlenbeck (Klauder-Anderson) Hahn-echo attenuation:
//   ln V = -Delta^2 tau_c^2 [ 2tau/tau_c - 3 + 4 e^{-tau/tau_c} - e^{-2tau/tau_c} ],
// tau = half the free evolution time. Delta in Mrad/s, times in seconds.
double ou_echo_envelope(double delta_mrad_s, double tau_c_s, double two_tau_s);

// Fluctuator decoherence rate: inverse of the 1/e time of the OU envelope at
// tau_c(T) = tau0 exp(E_a / kT). Returns 1/s.
double fluctuator_rate(double delta_mrad_s, double tau_c_s);

// T2(T) in ms from 1/T2 = 1/T2_bath + Gamma_f(T).
double t2_of_temperature(const FluctuatorModel& m, double temperature_k);

// Fits (E_a, tau0, Delta, T2_bath) to coherence-time data. Requires the T2
// minimum to be bracketed when a significant dip is present.
FluctuatorModel fit_t2_temperature(const std::vector<std::array<double, 2>>& t_and_t2_ms,
                                   const FluctuatorModel& initial);

// ------------------------------------------------------------- bath estimates

struct BathParams {
  double p1_concentration_ppm = 0.1;
  double inhomogeneous_linewidth_khz = 300.0;
  double carbon13_abundance = 0.011;
};

// Mean dipolar coupling (kHz) of like spins at number density n (cm^-3),
// nu_dd = C (mu0/4pi) g^2 muB^2 / h * n with the statistical linewidth
// constant C = 2 pi^2 / (9 sqrt 3).
double mean_dipolar_coupling_khz(double concentration_cm3);

double ppm_to_cm3(double ppm);

struct FlipFlopSuppression {
  double fraction = 0.0;       // coupling / linewidth
  double corrected_t2_ms = 0.0;
  double base_t2_ms = 0.0;
};

// Fraction of resonant flip-flopping pairs and the detuning-corrected T2.
FlipFlopSuppression flip_flop_suppression(double coupling_khz, double linewidth_khz,
                                          double base_t2_ms);

}  // namespace nvespin::infer
