#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvespin/eseem.hpp"
#include "nvespin/inference.hpp"
#include "nvespin/sigproc.hpp"
#include "nvespin/spectra.hpp"

namespace nvespin::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct FieldConfig {
  bool auto_magnitude = false;       // magnitude resolved from the resonance
  double magnitude_mt = 0.0;
  Vector3 nominal_axis = Vector3::UnitZ();
  EulerAngles euler;
};

struct SelectionConfig {
  eseem::ManifoldPair pair = eseem::ManifoldPair::minus_zero;
  int site = 1;  // convention label, 1..4; resolved to an axis per direction
};

struct ProcessingConfig {
  double dead_time_us = 0.5;
  int zero_fill = 8;
  sigproc::Window window = sigproc::Window::none;
  double bandwidth_ns = 0.0;  // 0 disables the detection-bandwidth filter
  double peak_floor = 0.1;
  bool dump_intermediates = false;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  int threads = 1;
  SpinSystem spin_system;
  std::optional<std::string> spin_system_file;
  FieldConfig field;
  double mw_frequency_ghz = 9.6;
  SelectionConfig selection;
  // sweep
  std::array<double, 2> window_mt{250.0, 450.0};
  double linewidth_mt = 0.5;
  std::array<spectra::PopulationSet, 4> populations{};
  // tau grid
  double tau_step_us = 0.004;
  int tau_points = 4096;
  ProcessingConfig processing;
  // cancellation scan
  std::array<double, 2> scan_range_mt{100.0, 600.0};
  int scan_points = 26;
  // ensemble damping
  double delta_a_frac = 0.0;
  double delta_q_frac = 0.0;
  int ensemble_samples = 1;
  // fit inputs
  std::array<double, 3> couplings_initial{-2.14, -2.70, -5.01};
  infer::FluctuatorModel fluctuator_initial;
  std::optional<std::array<double, 3>> decay_initial;
  struct OrientationEntry {
    std::string id;
    FieldConfig field;
    SelectionConfig selection;
  };
  std::vector<OrientationEntry> orientations;

  Json raw;  // original document, for the resolved copy
};

// Parses and validates a config document. Unknown keys are rejected; messages
// name the offending key. Throws ConfigError.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const Json& doc, const std::string& base_dir);

// Spin-system description file (.sys). Throws ConfigError.
SpinSystem load_spin_system(const std::string& path);
SpinSystem parse_spin_system(const Json& doc);
Json spin_system_to_json(const SpinSystem& sys);

// The fully-resolved document (defaults materialized, auto field resolved).
Json resolved_config_json(const RunConfig& cfg);

// Field direction after the Euler misalignment.
Vector3 resolved_direction(const FieldConfig& f);

// Site axis for a convention site label given the field direction.
Vector3 resolve_site_axis(int site_label, const Vector3& direction);

// Resolves an "auto" magnitude to the resonance field of the selected
// transition at the configured microwave frequency.
void resolve_field_magnitude(RunConfig& cfg);

// ------------------------------------------------------------ sample registry

struct SampleRecord {
  std::string label;
  std::string edge_orientation;
  double fluence_cm2 = 0.0;
  double anneal_temp_c = 0.0;
  double anneal_time_min = 0.0;
  double nv_concentration_cm3 = 0.0;
};

struct RegistryValidation {
  std::vector<SampleRecord> records;
  std::vector<std::string> errors;  // all violations, not first-only
};

RegistryValidation load_sample_registry(const std::string& path);

}  // namespace nvespin::cli
