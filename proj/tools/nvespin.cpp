#include <CLI11.hpp>

#include "cli/commands.hpp"

// nvespin: NV- center pulsed-ESR simulation and fitting toolbox.
//
//   nvespin simulate-spectrum --config cfg.json --out dir
//   nvespin simulate-eseem    --config cfg.json --out dir
//   nvespin scan-cancellation --config cfg.json --out dir
//   nvespin fit {orientation|decay|couplings|t2-temperature} --config cfg.json --data file.csv
//   nvespin samples validate --file registry.csv

int main(int argc, char** argv) {
  using namespace nvespin::cli;

  CLI::App app{"NV- spin physics engine: ESR spectra, ESEEM and coherence fits"};
  app.require_subcommand(1);

  CommonArgs common;
  std::uint64_t seed_opt = 0;
  int threads_opt = 0;
  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    auto* c = sub->add_option("--config", common.config_path, "run configuration (JSON)");
    if (needs_config) c->required();
    sub->add_option("--out", common.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed_opt, "override the config seed")
        ->each([&](const std::string&) { common.seed = seed_opt; });
    sub->add_option("--threads", threads_opt, "bound internal parallelism")
        ->each([&](const std::string&) { common.threads = threads_opt; });
    sub->add_flag("--verbose", common.verbose, "print solver warnings");
  };

  auto* sim_spec = app.add_subcommand("simulate-spectrum", "field-swept ESR stick spectrum");
  add_common(sim_spec);

  auto* sim_eseem = app.add_subcommand("simulate-eseem", "two-pulse ESEEM trace, FT and peaks");
  add_common(sim_eseem);

  auto* scan = app.add_subcommand("scan-cancellation", "modulation depth versus field");
  add_common(scan);

  auto* fit = app.add_subcommand("fit", "least-squares fits");
  fit->require_subcommand(1);
  std::string data_path;
  auto add_fit = [&](const char* name, const char* desc) {
    auto* sub = fit->add_subcommand(name, desc);
    add_common(sub);
    sub->add_option("--data", data_path, "input data CSV")->required();
    return sub;
  };
  auto* fit_orient = add_fit("orientation", "crystal orientation from labeled ESR peaks");
  auto* fit_decay = add_fit("decay", "stretched-exponential echo decay");
  auto* fit_coup = add_fit("couplings", "14N hyperfine/quadrupole from ESEEM frequencies");
  auto* fit_t2t = add_fit("t2-temperature", "thermally activated fluctuator model");

  auto* samples = app.add_subcommand("samples", "sample registry utilities");
  samples->require_subcommand(1);
  auto* validate = samples->add_subcommand("validate", "check a sample registry CSV");
  std::string registry_path;
  validate->add_option("--file", registry_path, "registry CSV")->required();

  CLI11_PARSE(app, argc, argv);

  if (sim_spec->parsed()) return cmd_simulate_spectrum(common);
  if (sim_eseem->parsed()) return cmd_simulate_eseem(common);
  if (scan->parsed()) return cmd_scan_cancellation(common);
  if (fit_orient->parsed()) return cmd_fit_orientation(common, data_path);
  if (fit_decay->parsed()) return cmd_fit_decay(common, data_path);
  if (fit_coup->parsed()) return cmd_fit_couplings(common, data_path);
  if (fit_t2t->parsed()) return cmd_fit_t2_temperature(common, data_path);
  if (validate->parsed()) return cmd_samples_validate(registry_path);
  return kExitConfig;
}
