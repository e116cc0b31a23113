#include "cli/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "nvespin/constants.hpp"
#include "nvespin/csv.hpp"

namespace nvespin::cli {

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

void reject_unknown(const Json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) bad_key(where.empty() ? k : where + "." + k, "unknown key");
}

double require_number(const Json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) bad_key(where + "." + key, "missing");
  if (!obj[key].is_number()) bad_key(where + "." + key, "expected a number");
  return obj[key].get<double>();
}

double number_or(const Json& obj, const std::string& where, const std::string& key,
                 double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) bad_key(where + "." + key, "expected a number");
  return obj[key].get<double>();
}

Vector3 parse_axis(const Json& j, const std::string& where) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "[001]") return Vector3(0, 0, 1);
    if (s == "[110]") return Vector3(1, 1, 0).normalized();
    if (s == "[111]") return Vector3(1, 1, 1).normalized();
    bad_key(where, "unknown axis name '" + s + "' (use [001], [110], [111] or a 3-vector)");
  }
  if (!j.is_array() || j.size() != 3) bad_key(where, "expected a 3-vector");
  Vector3 v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (v.norm() < 1e-12) bad_key(where, "zero vector");
  return v.normalized();
}

AxialTensor parse_axial(const Json& j, const std::string& where) {
  reject_unknown(j, where, {"parallel_mhz", "perpendicular_mhz", "axis"});
  return AxialTensor(require_number(j, where, "parallel_mhz"),
                     require_number(j, where, "perpendicular_mhz"),
                     parse_axis(j.at("axis"), where + ".axis"));
}

FieldConfig parse_field(const Json& j, const std::string& where) {
  reject_unknown(j, where, {"magnitude_mt", "nominal_axis", "euler_deg"});
  FieldConfig f;
  if (!j.contains("magnitude_mt")) bad_key(where + ".magnitude_mt", "missing");
  if (j["magnitude_mt"].is_string()) {
    if (j["magnitude_mt"].get<std::string>() != "auto")
      bad_key(where + ".magnitude_mt", "expected a number or \"auto\"");
    f.auto_magnitude = true;
  } else if (j["magnitude_mt"].is_number()) {
    f.magnitude_mt = j["magnitude_mt"].get<double>();
    if (f.magnitude_mt < 0) bad_key(where + ".magnitude_mt", "must be >= 0");
  } else {
    bad_key(where + ".magnitude_mt", "expected a number or \"auto\"");
  }
  if (!j.contains("nominal_axis")) bad_key(where + ".nominal_axis", "missing");
  f.nominal_axis = parse_axis(j["nominal_axis"], where + ".nominal_axis");
  if (j.contains("euler_deg")) {
    const auto& e = j["euler_deg"];
    if (!e.is_array() || e.size() != 3) bad_key(where + ".euler_deg", "expected [a, b, g]");
    f.euler = EulerAngles{e[0].get<double>(), e[1].get<double>(), e[2].get<double>()};
  }
  return f;
}

SelectionConfig parse_selection(const Json& j, const std::string& where) {
  reject_unknown(j, where, {"manifold_pair", "site"});
  SelectionConfig s;
  if (!j.contains("manifold_pair")) bad_key(where + ".manifold_pair", "missing");
  const std::string p = j["manifold_pair"].get<std::string>();
  if (p == "minus_zero")
    s.pair = eseem::ManifoldPair::minus_zero;
  else if (p == "zero_plus")
    s.pair = eseem::ManifoldPair::zero_plus;
  else
    bad_key(where + ".manifold_pair", "expected minus_zero or zero_plus");
  s.site = static_cast<int>(number_or(j, where, "site", 1));
  if (s.site < 1 || s.site > 4) bad_key(where + ".site", "must be 1..4");
  return s;
}

}  // namespace

SpinSystem parse_spin_system(const Json& doc) {
  reject_unknown(doc, "spin_system", {"schema_version", "g_e", "zfs_d_mhz", "nuclei"});
  SpinSystem sys;
  sys.g_e = require_number(doc, "spin_system", "g_e");
  if (sys.g_e <= 0) bad_key("spin_system.g_e", "must be positive");
  const double d = require_number(doc, "spin_system", "zfs_d_mhz");
  sys.zfs = AxialTensor::zfs_from_d(d, Vector3(1, 1, 1).normalized());
  if (doc.contains("nuclei")) {
    if (!doc["nuclei"].is_array()) bad_key("spin_system.nuclei", "expected an array");
    int idx = 0;
    for (const auto& nj : doc["nuclei"]) {
      const std::string where = "spin_system.nuclei[" + std::to_string(idx++) + "]";
      reject_unknown(nj, where, {"label", "multiplicity", "g_n", "hyperfine", "quadrupole"});
      const int mult = static_cast<int>(require_number(nj, where, "multiplicity"));
      if (mult < 2) bad_key(where + ".multiplicity", "must be >= 2");
      const double gn = require_number(nj, where, "g_n");
      if (!nj.contains("hyperfine")) bad_key(where + ".hyperfine", "missing");
      const AxialTensor hf = parse_axial(nj["hyperfine"], where + ".hyperfine");
      std::optional<AxialTensor> quad;
      if (nj.contains("quadrupole")) {
        const auto& qj = nj["quadrupole"];
        reject_unknown(qj, where + ".quadrupole", {"p_parallel_mhz", "axis"});
        quad = AxialTensor::quadrupole_from_p(
            require_number(qj, where + ".quadrupole", "p_parallel_mhz"),
            parse_axis(qj.at("axis"), where + ".quadrupole.axis"));
        if (mult < 3) bad_key(where + ".quadrupole", "requires I >= 1 (multiplicity >= 3)");
      }
      sys.nuclei.emplace_back(SpinQuantum(mult), gn, hf, quad,
                              nj.contains("label") ? nj["label"].get<std::string>() : "");
    }
  }
  return sys;
}

SpinSystem load_spin_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spin system file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("spin system file '" + path + "': " + e.what());
  }
  return parse_spin_system(doc);
}

Json spin_system_to_json(const SpinSystem& sys) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["g_e"] = sys.g_e;
  j["zfs_d_mhz"] = sys.zfs.zfs_d();
  j["nuclei"] = Json::array();
  for (const auto& n : sys.nuclei) {
    Json nj;
    nj["label"] = n.label;
    nj["multiplicity"] = n.spin.multiplicity;
    nj["g_n"] = n.g_n;
    nj["hyperfine"] = {{"parallel_mhz", n.hyperfine.parallel_mhz},
                       {"perpendicular_mhz", n.hyperfine.perpendicular_mhz},
                       {"axis", {n.hyperfine.axis[0], n.hyperfine.axis[1], n.hyperfine.axis[2]}}};
    if (n.quadrupole)
      nj["quadrupole"] = {
          {"p_parallel_mhz", n.quadrupole->parallel_mhz},
          {"axis", {n.quadrupole->axis[0], n.quadrupole->axis[1], n.quadrupole->axis[2]}}};
    j["nuclei"].push_back(nj);
  }
  return j;
}

RunConfig parse_config(const Json& doc, const std::string& base_dir) {
  reject_unknown(doc, "",
                 {"schema_version", "seed", "threads", "spin_system", "spin_system_file",
                  "field", "mw_frequency_ghz", "selection", "sweep", "tau_grid", "processing",
                  "scan", "ensemble", "couplings_initial", "fluctuator_initial",
                  "decay_initial", "orientations"});
  RunConfig cfg;
  if (!doc.contains("schema_version")) bad_key("schema_version", "missing");
  cfg.schema_version = doc["schema_version"].get<int>();
  if (cfg.schema_version != kSchemaVersion)
    bad_key("schema_version", "unsupported version " + std::to_string(cfg.schema_version));
  cfg.seed = static_cast<std::uint64_t>(number_or(doc, "", "seed", 0));
  cfg.threads = static_cast<int>(number_or(doc, "", "threads", 1));
  if (cfg.threads < 1) bad_key("threads", "must be >= 1");

  if (doc.contains("spin_system_file")) {
    std::filesystem::path p = doc["spin_system_file"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    cfg.spin_system_file = p.string();
    cfg.spin_system = load_spin_system(p.string());
  } else if (doc.contains("spin_system")) {
    cfg.spin_system = parse_spin_system(doc["spin_system"]);
  } else {
    bad_key("spin_system", "missing (or provide spin_system_file)");
  }

  if (!doc.contains("field")) bad_key("field", "missing");
  cfg.field = parse_field(doc["field"], "field");
  cfg.mw_frequency_ghz = number_or(doc, "", "mw_frequency_ghz", 9.6);
  if (cfg.mw_frequency_ghz <= 0) bad_key("mw_frequency_ghz", "must be positive");

  if (doc.contains("selection")) cfg.selection = parse_selection(doc["selection"], "selection");

  if (doc.contains("sweep")) {
    const auto& sj = doc["sweep"];
    reject_unknown(sj, "sweep", {"window_mt", "linewidth_mt", "populations"});
    if (sj.contains("window_mt")) {
      const auto& w = sj["window_mt"];
      if (!w.is_array() || w.size() != 2) bad_key("sweep.window_mt", "expected [lo, hi]");
      cfg.window_mt = {w[0].get<double>(), w[1].get<double>()};
    }
    cfg.linewidth_mt = number_or(sj, "sweep", "linewidth_mt", cfg.linewidth_mt);
    if (cfg.linewidth_mt <= 0) bad_key("sweep.linewidth_mt", "must be positive");
    if (sj.contains("populations")) {
      const auto& pj = sj["populations"];
      if (!pj.is_array() || pj.size() != 4)
        bad_key("sweep.populations", "expected an array of 4 site population sets");
      for (int i = 0; i < 4; ++i) {
        const std::string where = "sweep.populations[" + std::to_string(i) + "]";
        reject_unknown(pj[i], where, {"p_plus", "p_zero", "p_minus"});
        cfg.populations[i] = {require_number(pj[i], where, "p_plus"),
                              require_number(pj[i], where, "p_zero"),
                              require_number(pj[i], where, "p_minus")};
      }
    }
  }

  if (doc.contains("tau_grid")) {
    const auto& tj = doc["tau_grid"];
    reject_unknown(tj, "tau_grid", {"step_us", "points"});
    cfg.tau_step_us = number_or(tj, "tau_grid", "step_us", cfg.tau_step_us);
    cfg.tau_points = static_cast<int>(number_or(tj, "tau_grid", "points", cfg.tau_points));
    if (cfg.tau_step_us <= 0) bad_key("tau_grid.step_us", "must be positive");
    if (cfg.tau_points < 2) bad_key("tau_grid.points", "must be >= 2");
  }

  if (doc.contains("processing")) {
    const auto& pj = doc["processing"];
    reject_unknown(pj, "processing",
                   {"dead_time_us", "zero_fill", "window", "bandwidth_ns", "peak_floor",
                    "dump_intermediates"});
    cfg.processing.dead_time_us =
        number_or(pj, "processing", "dead_time_us", cfg.processing.dead_time_us);
    if (cfg.processing.dead_time_us < 0) bad_key("processing.dead_time_us", "must be >= 0");
    cfg.processing.zero_fill =
        static_cast<int>(number_or(pj, "processing", "zero_fill", cfg.processing.zero_fill));
    if (cfg.processing.zero_fill < 1) bad_key("processing.zero_fill", "must be >= 1");
    if (pj.contains("window")) {
      const std::string w = pj["window"].get<std::string>();
      if (w == "none")
        cfg.processing.window = sigproc::Window::none;
      else if (w == "hamming")
        cfg.processing.window = sigproc::Window::hamming;
      else
        bad_key("processing.window", "expected none or hamming");
    }
    cfg.processing.bandwidth_ns =
        number_or(pj, "processing", "bandwidth_ns", cfg.processing.bandwidth_ns);
    if (cfg.processing.bandwidth_ns < 0) bad_key("processing.bandwidth_ns", "must be >= 0");
    cfg.processing.peak_floor =
        number_or(pj, "processing", "peak_floor", cfg.processing.peak_floor);
    if (cfg.processing.peak_floor <= 0 || cfg.processing.peak_floor >= 1)
      bad_key("processing.peak_floor", "must be in (0, 1)");
    if (pj.contains("dump_intermediates"))
      cfg.processing.dump_intermediates = pj["dump_intermediates"].get<bool>();
  }

  if (doc.contains("scan")) {
    const auto& sj = doc["scan"];
    reject_unknown(sj, "scan", {"field_range_mt", "points"});
    if (sj.contains("field_range_mt")) {
      const auto& r = sj["field_range_mt"];
      if (!r.is_array() || r.size() != 2) bad_key("scan.field_range_mt", "expected [lo, hi]");
      cfg.scan_range_mt = {r[0].get<double>(), r[1].get<double>()};
      if (cfg.scan_range_mt[1] <= cfg.scan_range_mt[0])
        bad_key("scan.field_range_mt", "must be increasing");
    }
    cfg.scan_points = static_cast<int>(number_or(sj, "scan", "points", cfg.scan_points));
    if (cfg.scan_points < 2) bad_key("scan.points", "must be >= 2");
  }

  if (doc.contains("ensemble")) {
    const auto& ej = doc["ensemble"];
    reject_unknown(ej, "ensemble", {"delta_a_frac", "delta_q_frac", "samples"});
    cfg.delta_a_frac = number_or(ej, "ensemble", "delta_a_frac", 0.0);
    cfg.delta_q_frac = number_or(ej, "ensemble", "delta_q_frac", 0.0);
    cfg.ensemble_samples = static_cast<int>(number_or(ej, "ensemble", "samples", 1));
    if (cfg.delta_a_frac < 0 || cfg.delta_q_frac < 0)
      bad_key("ensemble.delta_a_frac", "fractions must be >= 0");
    if (cfg.ensemble_samples < 1) bad_key("ensemble.samples", "must be >= 1");
  }

  if (doc.contains("couplings_initial")) {
    const auto& c = doc["couplings_initial"];
    if (!c.is_array() || c.size() != 3)
      bad_key("couplings_initial", "expected [A_par, A_perp, P_par]");
    cfg.couplings_initial = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
  }
  if (doc.contains("decay_initial")) {
    const auto& c = doc["decay_initial"];
    if (!c.is_array() || c.size() != 3) bad_key("decay_initial", "expected [A, T2_ms, n]");
    cfg.decay_initial = std::array<double, 3>{c[0].get<double>(), c[1].get<double>(),
                                              c[2].get<double>()};
  }
  if (doc.contains("fluctuator_initial")) {
    const auto& fj = doc["fluctuator_initial"];
    reject_unknown(fj, "fluctuator_initial", {"e_a_mev", "tau0_s", "delta_mrad_s", "t2_bath_ms"});
    cfg.fluctuator_initial.e_a_mev =
        number_or(fj, "fluctuator_initial", "e_a_mev", cfg.fluctuator_initial.e_a_mev);
    cfg.fluctuator_initial.tau0_s =
        number_or(fj, "fluctuator_initial", "tau0_s", cfg.fluctuator_initial.tau0_s);
    cfg.fluctuator_initial.delta_mrad_s =
        number_or(fj, "fluctuator_initial", "delta_mrad_s", cfg.fluctuator_initial.delta_mrad_s);
    cfg.fluctuator_initial.t2_bath_ms =
        number_or(fj, "fluctuator_initial", "t2_bath_ms", cfg.fluctuator_initial.t2_bath_ms);
  }
  if (doc.contains("orientations")) {
    const auto& oj = doc["orientations"];
    if (!oj.is_array()) bad_key("orientations", "expected an array");
    int idx = 0;
    for (const auto& o : oj) {
      const std::string where = "orientations[" + std::to_string(idx++) + "]";
      reject_unknown(o, where, {"id", "field", "selection"});
      RunConfig::OrientationEntry e;
      if (!o.contains("id")) bad_key(where + ".id", "missing");
      e.id = o["id"].get<std::string>();
      if (!o.contains("field")) bad_key(where + ".field", "missing");
      e.field = parse_field(o["field"], where + ".field");
      if (o.contains("selection")) e.selection = parse_selection(o["selection"], where + ".selection");
      cfg.orientations.push_back(std::move(e));
    }
  }

  cfg.raw = doc;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(doc, std::filesystem::path(path).parent_path().string());
}

Vector3 resolved_direction(const FieldConfig& f) {
  return rotate_field(f.nominal_axis, f.euler);
}

Vector3 resolve_site_axis(int site_label, const Vector3& direction) {
  const auto order = spectra::site_order(direction);
  return nv_site_axes()[order[site_label - 1]];
}

void resolve_field_magnitude(RunConfig& cfg) {
  if (!cfg.field.auto_magnitude) return;
  const Vector3 dir = resolved_direction(cfg.field);
  const auto order = spectra::site_order(dir);
  const SpinSystem s = site_system(cfg.spin_system, order[cfg.selection.site - 1]);
  const auto branch = cfg.selection.pair == eseem::ManifoldPair::minus_zero
                          ? spectra::Branch::minus
                          : spectra::Branch::plus;
  const double guess =
      cfg.mw_frequency_ghz * 1e3 / (cfg.spin_system.g_e * constants::mu_b_mhz_per_mt);
  cfg.field.magnitude_mt =
      spectra::branch_resonance_field(s, cfg.mw_frequency_ghz, dir, branch, guess);
  cfg.field.auto_magnitude = false;
}

Json resolved_config_json(const RunConfig& cfg) {
  Json j = cfg.raw;
  j["schema_version"] = cfg.schema_version;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  // materialize the spin system and the resolved field magnitude
  j.erase("spin_system_file");
  j["spin_system"] = spin_system_to_json(cfg.spin_system);
  if (!j.contains("field")) j["field"] = Json::object();
  j["field"]["magnitude_mt"] = cfg.field.magnitude_mt;
  j["field"]["nominal_axis"] = {cfg.field.nominal_axis[0], cfg.field.nominal_axis[1],
                                cfg.field.nominal_axis[2]};
  j["field"]["euler_deg"] = {cfg.field.euler.alpha_deg, cfg.field.euler.beta_deg,
                             cfg.field.euler.gamma_deg};
  return j;
}

RegistryValidation load_sample_registry(const std::string& path) {
  RegistryValidation out;
  const auto table = csv::read_csv(path);
  const std::vector<std::string> required = {"label",           "edge_orientation",
                                             "fluence_cm2",     "anneal_temp_c",
                                             "anneal_time_min", "nv_concentration_cm3"};
  for (const auto& c : required)
    if (!table.has_column(c)) out.errors.push_back("missing column '" + c + "'");
  if (!out.errors.empty()) return out;

  std::set<std::string> seen;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    SampleRecord rec;
    const auto cell = [&](const std::string& c) { return table.rows[r][table.column_index(c)]; };
    rec.label = cell("label");
    rec.edge_orientation = cell("edge_orientation");
    auto num = [&](const std::string& c, double& dst) {
      try {
        dst = std::stod(cell(c));
      } catch (const std::exception&) {
        out.errors.push_back("row " + std::to_string(table.row_lines[r]) + ": non-numeric '" +
                             c + "'");
      }
    };
    num("fluence_cm2", rec.fluence_cm2);
    num("anneal_temp_c", rec.anneal_temp_c);
    num("anneal_time_min", rec.anneal_time_min);
    num("nv_concentration_cm3", rec.nv_concentration_cm3);
    if (rec.label.empty())
      out.errors.push_back("row " + std::to_string(table.row_lines[r]) + ": empty label");
    if (seen.count(rec.label))
      out.errors.push_back("row " + std::to_string(table.row_lines[r]) + ": duplicate label '" +
                           rec.label + "'");
    seen.insert(rec.label);
    if (rec.fluence_cm2 <= 0)
      out.errors.push_back("row " + std::to_string(table.row_lines[r]) +
                           ": fluence must be positive");
    if (rec.nv_concentration_cm3 <= 0)
      out.errors.push_back("row " + std::to_string(table.row_lines[r]) +
                           ": NV concentration must be positive");
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace nvespin::cli
