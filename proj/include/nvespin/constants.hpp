#pragma once

// Physical constants used throughout the engine. All Hamiltonian terms are
// expressed in MHz (energy/h) and magnetic fields in mT, so the magneton
// values below are frequencies per unit field.
namespace nvespin::constants {

// CODATA Bohr magneton / h, MHz per mT.
inline constexpr double mu_b_mhz_per_mt = 13.9962;

// CODATA nuclear magneton / h, MHz per mT.
inline constexpr double mu_n_mhz_per_mt = 7.622593e-3;

// Nuclear g-factors.
inline constexpr double g_n_14n = 0.403761;
inline constexpr double g_n_13c = 1.404824;

// Boltzmann constant, meV per K.
inline constexpr double boltzmann_mev_per_k = 0.0861733;

// Carbon atom density of diamond, cm^-3 (ppm <-> cm^-3 conversions).
inline constexpr double diamond_atom_density_cm3 = 1.762e23;

// (mu0/4pi) * (g muB)^2 / h at g = 2.0030, in Hz m^3. Equals 52.08 MHz nm^3,
// the familiar electron-electron dipolar coupling at 1 nm.
inline constexpr double dipolar_hz_m3 = 5.2076405039e-20;

// Statistical (dilute) dipolar linewidth constant for like spins,
// 2 pi^2 / (9 sqrt(3)); half width at half height of the Lorentzian.
inline constexpr double dilute_dipolar_prefactor = 1.2662708350586793;

// Nuclear Larmor frequency in MHz for a given g-factor and field in mT.
inline constexpr double larmor_mhz(double g_n, double field_mt) {
  return g_n * mu_n_mhz_per_mt * field_mt;
}

}  // namespace nvespin::constants
