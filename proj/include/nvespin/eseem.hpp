#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nvespin/hamiltonian.hpp"

namespace nvespin::eseem {

// Pair of laboratory-frame electron manifolds addressed by the microwave
// pulses: T- <-> T0 or T0 <-> T+.
enum class ManifoldPair { minus_zero, zero_plus };

struct TransitionSelection {
  ManifoldPair pair = ManifoldPair::minus_zero;
  Vector3 site_axis = Vector3(1, 1, 1).normalized();
};

inline std::array<int, 2> manifold_labels(ManifoldPair p) {
  return p == ManifoldPair::minus_zero ? std::array<int, 2>{-1, 0} : std::array<int, 2>{0, +1};
}

struct EseemTrace {
  RealVector tau_us;  // uniform grid
  RealVector v;       // ideal-pulse V(2 tau), V(0) = 1
  double field_mt = 0.0;
  Vector3 direction = Vector3::UnitZ();
  TransitionSelection selection;
};

// Effective nuclear Hamiltonians of the two selected electron manifolds:
// exact sub-blocks assembled from the full eigensolution (eigenvalues of the
// manifold's states on the orthonormalized projected nuclear basis).
struct SubHamiltonians {
  ComplexMatrix h_a, h_b;  // nuclear-space Hermitian matrices, MHz
};

// Internal eigen-format of the manifold pair: eigenvalues, nuclear eigenbasis
// per manifold and the cross-manifold overlap matrix M = Na^dagger Nb.
struct ManifoldPairData {
  RealVector lambda_a, lambda_b;   // MHz
  ComplexMatrix states_a, states_b;
  ComplexMatrix overlap;           // unitary
  int label_a = 0, label_b = 0;    // m_S labels
};

// Threshold for assigning full eigenvectors to a lab-frame m_S manifold.
inline constexpr double kManifoldWeightThreshold = 0.90;

ManifoldPairData manifold_pair_data(const SpinSystem& sys, const FieldVector& field,
                                    const TransitionSelection& sel,
                                    int cap = kDefaultDimensionCap);

SubHamiltonians sub_hamiltonians(const SpinSystem& sys, const FieldVector& field,
                                 const TransitionSelection& sel);

// Uniform tau grid in microseconds.
RealVector make_tau_grid(double step_us, int points, double start_us = 0.0);

// Two-pulse (Hahn) envelope modulation for ideal selective pulses:
//   V(2 tau) = (1/d) Re Tr[ M e^{-i Ha tau} M^+ e^{-i Hb tau}
//                           M e^{+i Ha tau} M^+ e^{+i Hb tau} ]
// evaluated in the manifold eigenbases with M the nuclear overlap matrix.
EseemTrace eseem_time_domain(const SpinSystem& sys, const FieldVector& field,
                             const TransitionSelection& sel, const RealVector& tau_us);

// Nuclear transition frequencies (all pairwise level differences, sorted) for
// the two manifolds of the selection.
struct NuclearFrequencies {
  int label_a = 0, label_b = 0;
  std::vector<double> freqs_a, freqs_b;  // MHz, ascending
};
NuclearFrequencies nuclear_frequencies(const SpinSystem& sys, const FieldVector& field,
                                       const TransitionSelection& sel);

enum class CombineMode { joint, product };

// Joint mode simulates all nuclei in one Hilbert space (exact); product mode
// multiplies the single-nucleus traces.
EseemTrace multi_nucleus_trace(const SpinSystem& sys, const FieldVector& field,
                               const TransitionSelection& sel, const RealVector& tau_us,
                               CombineMode mode);

// Modulation depth (max - min)/max over the simulated window, clamped to
// [0, 1]; a trace swinging through zero saturates at full depth.
struct ModulationDepthReport {
  double depth = 0.0;   // clamped
  double raw = 0.0;     // unclamped ratio, used for ranking scans
};
ModulationDepthReport modulation_depth(const EseemTrace& trace);

struct ScanPoint {
  double field_mt = 0.0;
  double depth = 0.0;  // clamped; NaN when the manifold assignment failed
  double raw = 0.0;
};
struct ScanResult {
  std::vector<ScanPoint> points;
  double argmax_field_mt = 0.0;  // by raw ratio over valid points
  double max_depth = 0.0;
  int skipped = 0;  // points dropped due to AmbiguousManifold
};

// Modulation depth versus field magnitude along a fixed direction.
ScanResult cancellation_scan(const SpinSystem& sys, const Vector3& direction,
                             const TransitionSelection& sel,
                             std::array<double, 2> field_range_mt, int n_points,
                             const RealVector& tau_us);

// Ensemble average of eseem_time_domain over Gaussian-distributed tensor
// values: independent fractional widths delta_a on A_par and A_perp and
// delta_q on P_par, applied per nucleus. Deterministic for a given seed.
EseemTrace damped_ensemble_trace(const SpinSystem& sys, const FieldVector& field,
                                 const TransitionSelection& sel, const RealVector& tau_us,
                                 double delta_a_frac, double delta_q_frac, int n_samples,
                                 std::uint64_t seed = 0);

}  // namespace nvespin::eseem
