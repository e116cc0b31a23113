#pragma once

#include <string>

#include "cli/config.hpp"

namespace nvespin::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitData = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;  // overrides the config value
  std::optional<int> threads;
  bool verbose = false;
};

int cmd_simulate_spectrum(const CommonArgs& args);
int cmd_simulate_eseem(const CommonArgs& args);
int cmd_scan_cancellation(const CommonArgs& args);
int cmd_fit_decay(const CommonArgs& args, const std::string& data_path);
int cmd_fit_orientation(const CommonArgs& args, const std::string& data_path);
int cmd_fit_couplings(const CommonArgs& args, const std::string& data_path);
int cmd_fit_t2_temperature(const CommonArgs& args, const std::string& data_path);
int cmd_samples_validate(const std::string& registry_path);

}  // namespace nvespin::cli
