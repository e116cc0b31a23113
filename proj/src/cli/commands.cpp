#include "cli/commands.hpp"

#include <filesystem>
#include <iostream>

#include "nvespin/constants.hpp"
#include "nvespin/csv.hpp"
#include "nvespin/inference.hpp"

namespace nvespin::cli {

namespace {

namespace fs = std::filesystem;

RunConfig prepare(const CommonArgs& args) {
  RunConfig cfg = load_config(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.threads) cfg.threads = *args.threads;
  resolve_field_magnitude(cfg);
  return cfg;
}

void write_resolved(const RunConfig& cfg, const std::string& out_dir) {
  csv::write_file_atomic((fs::path(out_dir) / "resolved_config.json").string(),
                         resolved_config_json(cfg).dump(2) + "\n");
}

std::string f2s(double v) { return csv::format_double(v); }

// Uniform error handling: config errors -> 2, data errors -> 4, solver -> 3.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataFormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}

eseem::TransitionSelection resolved_selection(const RunConfig& cfg, const Vector3& dir) {
  eseem::TransitionSelection sel;
  sel.pair = cfg.selection.pair;
  sel.site_axis = resolve_site_axis(cfg.selection.site, dir);
  return sel;
}

SpinSystem selected_site_system(const RunConfig& cfg, const Vector3& dir) {
  const auto order = spectra::site_order(dir);
  return site_system(cfg.spin_system, order[cfg.selection.site - 1]);
}

void write_trace_csv(const std::string& path, const eseem::EseemTrace& t) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(t.tau_us.size());
  for (Eigen::Index i = 0; i < t.tau_us.size(); ++i)
    rows.push_back({f2s(t.tau_us[i]), f2s(t.v[i])});
  csv::write_csv(path, {"tau_us", "v"}, rows);
}

void write_spectrum_csv(const std::string& path, const sigproc::FtSpectrum& s) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(s.freq_mhz.size());
  for (Eigen::Index i = 0; i < s.freq_mhz.size(); ++i)
    rows.push_back({f2s(s.freq_mhz[i]), f2s(s.amplitude[i])});
  csv::write_csv(path, {"freq_MHz", "amplitude"}, rows);
}

}  // namespace

int cmd_simulate_spectrum(const CommonArgs& args) {
  return guarded([&] {
    RunConfig cfg = prepare(args);
    const auto spec = spectra::stick_spectrum(cfg.spin_system, cfg.mw_frequency_ghz,
                                              cfg.field.nominal_axis, cfg.field.euler,
                                              cfg.populations, cfg.window_mt);
    if (args.verbose)
      for (const auto& w : spec.warnings) std::cerr << "warning: " << w << "\n";

    std::vector<std::vector<std::string>> rows;
    for (const auto& line : spec.lines)
      rows.push_back({f2s(line.field_mt), f2s(line.signed_amplitude),
                      std::to_string(line.label.site), spectra::branch_name(line.label.branch),
                      f2s(line.intensity)});
    csv::write_csv((fs::path(args.out_dir) / "sticks.csv").string(),
                   {"field_mT", "amplitude", "site", "branch", "intensity"}, rows);

    std::vector<std::vector<std::string>> brows;
    if (!spec.lines.empty()) {
      const auto curve = spectra::broaden(spec, cfg.window_mt, cfg.linewidth_mt);
      for (Eigen::Index i = 0; i < curve.field_mt.size(); ++i)
        brows.push_back({f2s(curve.field_mt[i]), f2s(curve.amplitude[i])});
    }
    csv::write_csv((fs::path(args.out_dir) / "spectrum.csv").string(),
                   {"field_mT", "amplitude"}, brows);
    write_resolved(cfg, args.out_dir);
    std::cout << "simulate-spectrum: " << spec.lines.size() << " lines in ["
              << f2s(cfg.window_mt[0]) << ", " << f2s(cfg.window_mt[1]) << "] mT\n";
    return kExitOk;
  });
}

int cmd_simulate_eseem(const CommonArgs& args) {
  return guarded([&] {
    RunConfig cfg = prepare(args);
    const Vector3 dir = resolved_direction(cfg.field);
    const auto sel = resolved_selection(cfg, dir);
    const FieldVector field(cfg.field.magnitude_mt, dir);
    const auto tau = eseem::make_tau_grid(cfg.tau_step_us, cfg.tau_points);

    eseem::EseemTrace trace;
    if (cfg.ensemble_samples > 1 || cfg.delta_a_frac > 0 || cfg.delta_q_frac > 0)
      trace = eseem::damped_ensemble_trace(cfg.spin_system, field, sel, tau, cfg.delta_a_frac,
                                           cfg.delta_q_frac, cfg.ensemble_samples, cfg.seed);
    else
      trace = eseem::eseem_time_domain(cfg.spin_system, field, sel, tau);

    const fs::path out(args.out_dir);
    write_trace_csv((out / "trace.csv").string(), trace);

    eseem::EseemTrace processed = trace;
    if (cfg.processing.bandwidth_ns > 0) {
      processed = sigproc::detection_bandwidth_filter(trace, cfg.processing.bandwidth_ns);
      if (cfg.processing.dump_intermediates)
        write_trace_csv((out / "trace_filtered.csv").string(), processed);
    }
    const auto raw_ft = sigproc::cosine_ft(processed, cfg.processing.dead_time_us,
                                           cfg.processing.zero_fill, cfg.processing.window);
    if (cfg.processing.dump_intermediates)
      write_spectrum_csv((out / "ft_raw.csv").string(), raw_ft);
    const auto ft = sigproc::phase_correct_first_order(raw_ft, raw_ft.start_time_us);
    write_spectrum_csv((out / "ft.csv").string(), ft);

    const auto peaks = sigproc::pick_peaks(ft, cfg.processing.peak_floor);
    Json pj;
    pj["field_mt"] = cfg.field.magnitude_mt;
    pj["modulation_depth"] = eseem::modulation_depth(trace).depth;
    pj["peaks"] = Json::array();
    for (const auto& p : peaks)
      pj["peaks"].push_back(
          {{"freq_MHz", p.freq_mhz}, {"amplitude", p.amplitude}, {"width_MHz", p.width_mhz}});
    csv::write_file_atomic((out / "peaks.json").string(), pj.dump(2) + "\n");
    write_resolved(cfg, args.out_dir);
    std::cout << "simulate-eseem: B0 = " << f2s(cfg.field.magnitude_mt) << " mT, depth = "
              << f2s(eseem::modulation_depth(trace).depth) << ", " << peaks.size()
              << " peaks\n";
    return kExitOk;
  });
}

int cmd_scan_cancellation(const CommonArgs& args) {
  return guarded([&] {
    RunConfig cfg = prepare(args);
    const Vector3 dir = resolved_direction(cfg.field);
    const auto sel = resolved_selection(cfg, dir);
    const auto tau = eseem::make_tau_grid(cfg.tau_step_us, cfg.tau_points);
    const auto scan = eseem::cancellation_scan(cfg.spin_system, dir, sel, cfg.scan_range_mt,
                                               cfg.scan_points, tau);

    std::vector<std::vector<std::string>> rows;
    for (const auto& p : scan.points) rows.push_back({f2s(p.field_mt), f2s(p.depth)});
    csv::write_csv((fs::path(args.out_dir) / "scan.csv").string(), {"field_mT", "depth"}, rows);

    Json summary;
    summary["argmax_field_mT"] = scan.argmax_field_mt;
    summary["max_depth"] = scan.max_depth;
    summary["points"] = static_cast<int>(scan.points.size());
    summary["skipped_ambiguous"] = scan.skipped;
    csv::write_file_atomic((fs::path(args.out_dir) / "scan_summary.json").string(),
                           summary.dump(2) + "\n");
    write_resolved(cfg, args.out_dir);
    std::cout << summary.dump() << "\n";
    return kExitOk;
  });
}

int cmd_fit_decay(const CommonArgs& args, const std::string& data_path) {
  return guarded([&] {
    RunConfig cfg = prepare(args);
    const auto table = csv::read_csv(data_path);
    sigproc::EchoDecay decay;
    const auto tt = table.numeric("two_tau_us");
    decay.two_tau_us = Eigen::Map<const RealVector>(tt.data(), tt.size());
    auto amp = table.numeric("amplitude");
    if (table.has_column("amplitude_imag")) {
      const auto imag = table.numeric("amplitude_imag");
      for (size_t i = 0; i < amp.size(); ++i) amp[i] = std::hypot(amp[i], imag[i]);
    }
    decay.amplitude = Eigen::Map<const RealVector>(amp.data(), amp.size());

    const auto fit = sigproc::fit_stretched_exponential(decay, cfg.decay_initial);
    Json j;
    j["model"] = "A*exp(-(2tau/T2)^n)";
    j["parameters"] = {{"A", fit.amplitude}, {"T2_ms", fit.t2_ms}, {"n", fit.n}};
    j["uncertainties"] = {{"A", fit.sigma_amplitude},
                          {"T2_ms", fit.sigma_t2_ms},
                          {"n", fit.sigma_n}};
    j["residual_norm"] = fit.residual_norm;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    csv::write_file_atomic((fs::path(args.out_dir) / "fit_decay.json").string(),
                           j.dump(2) + "\n");
    write_resolved(cfg, args.out_dir);
    std::cout << "fit decay: T2 = " << f2s(fit.t2_ms) << " +- " << f2s(fit.sigma_t2_ms)
              << " ms, n = " << f2s(fit.n) << " +- " << f2s(fit.sigma_n) << "\n";
    return kExitOk;
  });
}

int cmd_fit_orientation(const CommonArgs& args, const std::string& data_path) {
  return guarded([&] {
    RunConfig cfg = prepare(args);
    const auto table = csv::read_csv(data_path);
    const auto sites = table.numeric("site");
    const auto fields = table.numeric("field_mt");
    const int bcol = table.column_index("branch");
    if (bcol < 0) throw DataFormatError("missing column 'branch'", 1);

    std::vector<infer::MeasuredPeak> peaks;
    for (size_t r = 0; r < table.rows.size(); ++r) {
      infer::MeasuredPeak p;
      p.label.site = static_cast<int>(sites[r]);
      if (p.label.site < 1 || p.label.site > 4)
        throw DataFormatError("site must be 1..4", table.row_lines[r]);
      const std::string& b = table.rows[r][bcol];
      if (b == "plus" || b == "+")
        p.label.branch = spectra::Branch::plus;
      else if (b == "minus" || b == "-")
        p.label.branch = spectra::Branch::minus;
      else
        throw DataFormatError("branch must be plus or minus", table.row_lines[r]);
      p.field_mt = fields[r];
      peaks.push_back(p);
    }

    const auto fit = infer::fit_orientation(peaks, cfg.spin_system, cfg.mw_frequency_ghz,
                                            cfg.field.nominal_axis);
    Json j;
    j["euler_deg"] = {fit.euler.alpha_deg, fit.euler.beta_deg, fit.euler.gamma_deg};
    j["residual_rms_mT"] = fit.residual_rms_mt;
    j["per_peak_residual_mT"] = fit.per_peak_residual_mt;
    j["converged"] = fit.converged;
    j["multi_start_log"] = fit.start_log;
    csv::write_file_atomic((fs::path(args.out_dir) / "fit_orientation.json").string(),
                           j.dump(2) + "\n");
    write_resolved(cfg, args.out_dir);
    std::cout << "fit orientation: (" << f2s(fit.euler.alpha_deg) << ", "
              << f2s(fit.euler.beta_deg) << ", 0) deg, rms " << f2s(fit.residual_rms_mt)
              << " mT\n";
    return fit.converged ? kExitOk : kExitSolver;
  });
}

int cmd_fit_couplings(const CommonArgs& args, const std::string& data_path) {
  return guarded([&] {
    RunConfig cfg = prepare(args);
    if (cfg.orientations.size() < 2)
      throw ConfigError("fit couplings requires >= 2 entries under 'orientations'");
    const auto table = csv::read_csv(data_path);
    const auto freqs = table.numeric("freq_mhz");
    const int idcol = table.column_index("orientation_id");
    const int mcol = table.column_index("manifold");
    if (idcol < 0) throw DataFormatError("missing column 'orientation_id'", 1);
    if (mcol < 0) throw DataFormatError("missing column 'manifold'", 1);

    std::vector<infer::OrientationDataset> data;
    for (const auto& entry : cfg.orientations) {
      infer::OrientationDataset d;
      FieldConfig fc = entry.field;
      if (fc.auto_magnitude)
        throw ConfigError("orientations[].field.magnitude_mt must be numeric for fitting");
      const Vector3 dir = resolved_direction(fc);
      d.field = FieldVector(fc.magnitude_mt, dir);
      d.selection.pair = entry.selection.pair;
      d.selection.site_axis = resolve_site_axis(entry.selection.site, dir);
      const auto labels = eseem::manifold_labels(entry.selection.pair);
      for (size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r][idcol] != entry.id) continue;
        const int m = std::stoi(table.rows[r][mcol]);
        if (m == labels[0])
          d.freqs_a.push_back(freqs[r]);
        else if (m == labels[1])
          d.freqs_b.push_back(freqs[r]);
        else
          throw DataFormatError("manifold " + std::to_string(m) + " not in the selection",
                                table.row_lines[r]);
      }
      std::sort(d.freqs_a.begin(), d.freqs_a.end());
      std::sort(d.freqs_b.begin(), d.freqs_b.end());
      data.push_back(std::move(d));
    }

    const auto fit =
        infer::fit_nitrogen_couplings(data, cfg.spin_system, cfg.couplings_initial);
    Json j;
    j["parameters"] = {{"A_par_MHz", fit.a_par_mhz},
                       {"A_perp_MHz", fit.a_perp_mhz},
                       {"P_par_MHz", fit.p_par_mhz}};
    j["uncertainties"] = {{"A_par_MHz", fit.sigma_a_par},
                          {"A_perp_MHz", fit.sigma_a_perp},
                          {"P_par_MHz", fit.sigma_p_par}};
    j["residual_rms_MHz"] = fit.residual_rms_mhz;
    j["converged"] = fit.converged;
    csv::write_file_atomic((fs::path(args.out_dir) / "fit_couplings.json").string(),
                           j.dump(2) + "\n");
    write_resolved(cfg, args.out_dir);
    std::cout << "fit couplings: A_par " << f2s(fit.a_par_mhz) << ", A_perp "
              << f2s(fit.a_perp_mhz) << ", P_par " << f2s(fit.p_par_mhz) << " MHz\n";
    return kExitOk;
  });
}

int cmd_fit_t2_temperature(const CommonArgs& args, const std::string& data_path) {
  return guarded([&] {
    RunConfig cfg = prepare(args);
    const auto table = csv::read_csv(data_path);
    const auto temp = table.numeric("temperature_k");
    const auto t2 = table.numeric("t2_ms");
    std::vector<std::array<double, 2>> data;
    for (size_t i = 0; i < temp.size(); ++i) data.push_back({temp[i], t2[i]});

    const auto fit = infer::fit_t2_temperature(data, cfg.fluctuator_initial);
    Json j;
    j["parameters"] = Json{{"E_a_meV", fit.e_a_mev},
                           {"tau0_s", fit.tau0_s},
                           {"delta_Mrad_s", fit.delta_mrad_s},
                           {"T2_bath_ms", fit.t2_bath_ms},
                           {"density_cm3", fit.density_cm3}};
    j["residual_rms_ms"] = fit.residual_rms_ms;
    j["converged"] = fit.converged;
    j["ea_identifiable"] = fit.ea_identifiable;
    csv::write_file_atomic((fs::path(args.out_dir) / "fit_t2_temperature.json").string(),
                           j.dump(2) + "\n");
    write_resolved(cfg, args.out_dir);
    std::cout << "fit t2-temperature: E_a = " << f2s(fit.e_a_mev) << " meV, T2_bath = "
              << f2s(fit.t2_bath_ms) << " ms"
              << (fit.ea_identifiable ? "" : " (E_a unidentifiable)") << "\n";
    return kExitOk;
  });
}

int cmd_samples_validate(const std::string& registry_path) {
  return guarded([&] {
    const auto v = load_sample_registry(registry_path);
    if (!v.errors.empty()) {
      for (const auto& e : v.errors) std::cerr << "registry: " << e << "\n";
      return kExitData;
    }
    std::cout << "samples: " << v.records.size() << " records valid\n";
    for (const auto& r : v.records)
      std::cout << "  " << r.label << ": fluence " << f2s(r.fluence_cm2) << " cm^-2, anneal "
                << f2s(r.anneal_temp_c) << " C / " << f2s(r.anneal_time_min) << " min, [NV-] "
                << f2s(r.nv_concentration_cm3) << " cm^-3\n";
    return kExitOk;
  });
}

}  // namespace nvespin::cli
