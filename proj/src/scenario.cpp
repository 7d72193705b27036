#include "mppt/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>
#include <yaml-cpp/yaml.h>

#include "mppt/error.hpp"

#ifndef MPPT_DEFAULT_PRESET_DIR
#define MPPT_DEFAULT_PRESET_DIR "config/presets"
#endif

namespace mppt {

namespace {

/// One mapping in the document. Tracks which keys were consumed so leftovers can be reported.
class Section {
 public:
  Section(YAML::Node node, std::string path, std::string file)
      : node_(std::move(node)), path_(std::move(path)), file_(std::move(file)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigError(fmt::format("{}:{}: {}: expected a mapping", file_, node_.Mark().line + 1, label()));
    }
  }

  bool has(const std::string& key) const { return present() && node_[key] && !node_[key].IsNull(); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return mark_seen(key, fallback);
    const auto value = node_[key];
    seen_.insert(key);
    const auto text = scalar(key);
    if (text == "inf" || text == ".inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    try {
      return value.as<double>();
    } catch (const YAML::Exception&) {
      fail(key, fmt::format("'{}' is not a number", text));
    }
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return mark_seen(key, fallback);
    seen_.insert(key);
    try {
      return node_[key].as<int>();
    } catch (const YAML::Exception&) {
      fail(key, fmt::format("'{}' is not an integer", scalar(key)));
    }
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return mark_seen(key, fallback);
    seen_.insert(key);
    try {
      return node_[key].as<bool>();
    } catch (const YAML::Exception&) {
      fail(key, fmt::format("'{}' is not true/false", scalar(key)));
    }
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return mark_seen(key, fallback);
    seen_.insert(key);
    return scalar(key);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(present() ? node_[key] : YAML::Node(), field(key), file_);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& reason) const {
    throw ConfigError(fmt::format("{}:{}: {}: {}", file_, line(key), field(key), reason));
  }

  void check(const std::string& key, bool ok, const std::string& rule) const {
    if (!ok) fail(key, "must satisfy " + rule);
  }

  void reject_unknown() const {
    if (!present()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) {
        throw ConfigError(
            fmt::format("{}:{}: {}: unknown key", file_, kv.first.Mark().line + 1, field(key)));
      }
    }
  }

  const std::string& file() const { return file_; }

 private:
  bool present() const { return node_ && node_.IsMap(); }

  template <typename T>
  T mark_seen(const std::string& key, T fallback) {
    seen_.insert(key);
    return fallback;
  }

  std::string scalar(const std::string& key) const {
    const auto value = node_[key];
    if (!value.IsScalar()) fail(key, "expected a scalar value");
    return value.Scalar();
  }

  int line(const std::string& key) const {
    if (has(key)) return node_[key].Mark().line + 1;
    if (node_ && !node_.IsNull()) return node_.Mark().line + 1;
    return 1;
  }

  std::string label() const { return path_.empty() ? "<document>" : path_; }

  YAML::Node node_;
  std::string path_;
  std::string file_;
  std::set<std::string> seen_;
};

YAML::Node parse_yaml(const std::string& text, const std::string& file) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}: {}", file, e.mark.line + 1, e.msg));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double read_reference_temperature(Section& sec, double fallback_k) {
  const bool has_k = sec.has("t_ref_k");
  const bool has_c = sec.has("t_ref_c");
  if (has_k && has_c) sec.fail("t_ref_c", "give either t_ref_k or t_ref_c, not both");
  const double k = sec.number("t_ref_k", fallback_k);
  if (has_c) return celsius_to_kelvin(sec.number("t_ref_c", 0.0));
  sec.number("t_ref_c", 0.0);
  return k;
}

// Reads panel keys on top of `base`.
PanelSpec read_panel_fields(Section& sec, PanelSpec base) {
  PanelSpec p = std::move(base);
  p.name = sec.text("name", p.name);
  p.cells_in_series = sec.integer("cells_in_series", p.cells_in_series);
  p.i_sc = sec.number("i_sc", p.i_sc);
  p.v_oc = sec.number("v_oc", p.v_oc);
  p.alpha = sec.number("alpha", p.alpha);
  p.n = sec.number("n", p.n);
  p.dv_di_oc = sec.number("dv_di_oc", p.dv_di_oc);
  p.r_p = sec.number("r_p", p.r_p);
  p.t_ref = read_reference_temperature(sec, p.t_ref);
  p.g_ref = sec.number("g_ref", p.g_ref);

  sec.check("cells_in_series", p.cells_in_series >= 1, ">= 1");
  sec.check("i_sc", p.i_sc > 0.0 && std::isfinite(p.i_sc), "> 0");
  sec.check("v_oc", p.v_oc > 0.0 && std::isfinite(p.v_oc), "> 0");
  sec.check("alpha", std::isfinite(p.alpha), "finite");
  sec.check("n", p.n >= 1.0 && std::isfinite(p.n), ">= 1");
  sec.check("dv_di_oc", p.dv_di_oc < 0.0, "< 0");
  sec.check("r_p", p.r_p > 0.0, "> 0 (or inf)");
  sec.check(sec.has("t_ref_c") ? "t_ref_c" : "t_ref_k", p.t_ref > 0.0 && std::isfinite(p.t_ref), "> 0 K");
  sec.check("g_ref", p.g_ref > 0.0 && std::isfinite(p.g_ref), "> 0");
  return p;
}

PanelSpec read_panel(Section sec, const std::filesystem::path& scenario_dir) {
  PanelSpec base;
  if (sec.has("preset")) {
    const auto name = sec.text("preset", "");
    try {
      base = load_panel_preset(name, scenario_dir);
    } catch (const PresetNotFound& e) {
      sec.fail("preset", e.what());
    }
  } else {
    sec.text("preset", "");
  }
  const bool inline_panel = sec.has("i_sc") || sec.has("v_oc") || sec.has("dv_di_oc");
  if (base.name.empty() && !inline_panel) sec.fail("preset", "give a preset name or inline panel values");
  PanelSpec p = read_panel_fields(sec, base);
  sec.reject_unknown();
  return p;
}

BandGapForm parse_band_gap(Section& sec) {
  const auto form = sec.text("band_gap_form", "minus-t0");
  if (form == "minus-t0") return BandGapForm::MinusT0;
  if (form == "varshni") return BandGapForm::Varshni;
  sec.fail("band_gap_form", fmt::format("'{}' is not one of minus-t0, varshni", form));
}

std::optional<double> number_or_auto(Section& sec, const std::string& key) {
  if (sec.has(key) && sec.text(key, "") == "auto") return std::nullopt;
  if (!sec.has(key)) {
    sec.text(key, "");
    return std::nullopt;
  }
  return sec.number(key, 0.0);
}

}  // namespace

CellParams PanelSpec::cell_params() const {
  CellParams c;
  const double cells = static_cast<double>(cells_in_series);
  c.i_sc_ref = i_sc;
  c.v_oc_ref = v_oc / cells;
  c.alpha = alpha;
  c.n = n;
  c.r_p = r_p / cells;
  c.dv_di_oc = dv_di_oc / cells;
  c.t_ref = t_ref;
  c.g_ref = g_ref;
  return c;
}

PanelSpec load_panel_preset(const std::string& name, const std::filesystem::path& scenario_dir) {
  if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
    throw PresetNotFound(fmt::format("invalid preset name '{}'", name));
  }
  const std::vector<std::filesystem::path> search = {scenario_dir / "presets", scenario_dir / ".." / "presets",
                                                     std::filesystem::path(MPPT_DEFAULT_PRESET_DIR)};
  for (const auto& dir : search) {
    const auto candidate = dir / (name + ".yaml");
    std::error_code ec;
    if (!std::filesystem::is_regular_file(candidate, ec)) continue;
    const std::string file = candidate.lexically_normal().string();
    Section sec(parse_yaml(read_file(candidate), file), "", file);
    PanelSpec p = read_panel_fields(sec, PanelSpec{});
    sec.reject_unknown();
    if (p.name.empty()) p.name = name;
    return p;
  }
  throw PresetNotFound(fmt::format("no preset named '{}' (looked in {}, {}, {})", name,
                                search[0].string(), search[1].string(), search[2].string()));
}

ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& source) {
  const std::string file = source.empty() ? "<scenario>" : source.string();
  const auto dir = source.empty() ? std::filesystem::current_path() : source.parent_path();
  const YAML::Node root = parse_yaml(text, file);
  if (!root || root.IsNull()) throw ConfigError(fmt::format("{}: empty scenario", file));
  Section top(root, "", file);

  ScenarioConfig cfg;
  cfg.source = source;
  cfg.name = top.text("name", source.stem().string());

  cfg.panel = read_panel(top.child("panel"), dir);

  {
    auto sec = top.child("array");
    cfg.panels_in_series = sec.integer("panels_in_series", 1);
    cfg.strings_in_parallel = sec.integer("strings_in_parallel", 1);
    sec.check("panels_in_series", cfg.panels_in_series >= 1, ">= 1");
    sec.check("strings_in_parallel", cfg.strings_in_parallel >= 1, ">= 1");
    sec.reject_unknown();
  }
  {
    auto sec = top.child("model");
    cfg.solver.band_gap = parse_band_gap(sec);
    cfg.solver.tolerance = sec.number("solver_tolerance", cfg.solver.tolerance);
    cfg.solver.max_iterations = sec.integer("max_iterations", cfg.solver.max_iterations);
    cfg.solver.max_exponent = sec.number("max_exponent", cfg.solver.max_exponent);
    sec.check("solver_tolerance", cfg.solver.tolerance > 0.0, "> 0");
    sec.check("max_iterations", cfg.solver.max_iterations >= 1, ">= 1");
    sec.check("max_exponent", cfg.solver.max_exponent > 0.0 && cfg.solver.max_exponent <= 709.0, "0 < x <= 709");
    sec.reject_unknown();
  }
  {
    auto sec = top.child("oracle");
    cfg.oracle.grid_points = sec.integer("grid_points", cfg.oracle.grid_points);
    cfg.oracle.refine_tolerance = sec.number("refine_tolerance", cfg.oracle.refine_tolerance);
    cfg.oracle.slope_bound = sec.number("slope_bound", cfg.oracle.slope_bound);
    sec.check("grid_points", cfg.oracle.grid_points >= 100, ">= 100");
    sec.check("refine_tolerance", cfg.oracle.refine_tolerance > 0.0, "> 0");
    sec.check("slope_bound", cfg.oracle.slope_bound > 0.0, "> 0");
    sec.reject_unknown();
  }
  {
    auto sec = top.child("converter");
    cfg.v_bus = number_or_auto(sec, "v_bus");
    cfg.d_min = sec.number("d_min", cfg.d_min);
    cfg.d_max = sec.number("d_max", cfg.d_max);
    if (cfg.v_bus) sec.check("v_bus", *cfg.v_bus > 0.0 && std::isfinite(*cfg.v_bus), "> 0 (or auto)");
    sec.check("d_min", cfg.d_min > 0.0 && cfg.d_min < 1.0, "0 < d_min < 1");
    sec.check("d_max", cfg.d_max > cfg.d_min && cfg.d_max < 1.0, "d_min < d_max < 1");
    sec.reject_unknown();
  }
  {
    auto sec = top.child("controller");
    const auto kind_name = sec.text("kind", std::string(to_string(cfg.kind)));
    const auto kind = parse_controller_kind(kind_name);
    if (!kind) {
      sec.fail("kind", fmt::format("'{}' is not one of conventional, revised-fixed-bound, revised-adaptive-bound",
                                   kind_name));
    }
    cfg.kind = *kind;
    auto& c = cfg.controller;
    c.delta_d_nominal = sec.number("delta_d_nominal", c.delta_d_nominal);
    c.delta_d_max_0 = sec.number("delta_d_max_0", c.delta_d_max_0);
    c.delta_d_max_floor = sec.number("delta_d_max_floor", c.delta_d_max_floor);
    c.delta_d_floor = sec.number("delta_d_floor", c.delta_d_floor);
    c.epsilon = sec.number("epsilon", c.epsilon);
    c.acc = sec.number("acc", c.acc);
    c.deacc = sec.number("deacc", c.deacc);
    c.slope_normalization = sec.flag("slope_normalization", c.slope_normalization);
    c.thresholds.dv = sec.number("slope_dv_threshold", c.thresholds.dv);
    c.thresholds.di = sec.number("slope_di_threshold", c.thresholds.di);
    c.thresholds.cap = sec.number("slope_cap", c.thresholds.cap);
    c.adaptive_upper_bound = cfg.kind == ControllerKind::RevisedAdaptiveBound;
    c.d_min = cfg.d_min;
    c.d_max = cfg.d_max;

    sec.check("delta_d_max_0", c.delta_d_max_0 > 0.0 && c.delta_d_max_0 < 1.0, "0 < delta_d_max_0 < 1");
    sec.check("delta_d_nominal", c.delta_d_nominal > 0.0 && c.delta_d_nominal <= c.delta_d_max_0,
              "0 < delta_d_nominal <= delta_d_max_0");
    sec.check("delta_d_max_floor", c.delta_d_max_floor > 0.0 && c.delta_d_max_floor <= c.delta_d_max_0,
              "0 < delta_d_max_floor <= delta_d_max_0");
    sec.check("delta_d_floor",
              c.delta_d_floor > 0.0 && c.delta_d_floor <= c.delta_d_max_floor && c.delta_d_floor <= c.delta_d_nominal,
              "0 < delta_d_floor <= min(delta_d_max_floor, delta_d_nominal)");
    sec.check("epsilon", c.epsilon > 0.0, "> 0");
    sec.check("acc", c.acc > 1.0 && std::isfinite(c.acc), "> 1");
    sec.check("deacc", c.deacc > 0.0 && c.deacc < 1.0, "0 < deacc < 1");
    sec.check("slope_dv_threshold", c.thresholds.dv > 0.0, "> 0");
    sec.check("slope_di_threshold", c.thresholds.di > 0.0, "> 0");
    sec.check("slope_cap", c.thresholds.cap > 0.0, "> 0");
    sec.reject_unknown();
  }
  {
    auto sec = top.child("profile");
    const auto src = sec.text("source", "builtin-table1");
    if (src == "builtin-table1") {
      cfg.profile_source = ProfileSource::BuiltinTable1;
      if (sec.has("path")) sec.fail("path", "only valid with source: csv");
      sec.text("path", "");
    } else if (src == "csv") {
      cfg.profile_source = ProfileSource::Csv;
      if (!sec.has("path")) sec.fail("path", "required with source: csv");
      const std::filesystem::path p = sec.text("path", "");
      cfg.profile_path = p.is_absolute() ? p : (dir / p).lexically_normal();
      std::error_code ec;
      if (!std::filesystem::is_regular_file(cfg.profile_path, ec)) {
        sec.fail("path", fmt::format("profile CSV '{}' not found", cfg.profile_path.string()));
      }
    } else {
      sec.fail("source", fmt::format("'{}' is not one of builtin-table1, csv", src));
    }
    sec.reject_unknown();
  }
  {
    auto sec = top.child("simulation");
    auto& s = cfg.sim;
    s.control_interval = sec.number("control_interval", s.control_interval);
    s.duration = sec.number("duration", s.duration);
    s.initial_duty = number_or_auto(sec, "initial_duty");
    s.initial_voltage_fraction = sec.number("initial_voltage_fraction", s.initial_voltage_fraction);
    sec.check("control_interval", s.control_interval > 0.0 && std::isfinite(s.control_interval), "> 0");
    sec.check("duration", s.duration >= s.control_interval * (1.0 - 1e-12) && std::isfinite(s.duration),
              ">= control_interval");
    if (s.initial_duty) {
      sec.check("initial_duty", *s.initial_duty >= cfg.d_min && *s.initial_duty <= cfg.d_max,
                "converter.d_min <= initial_duty <= converter.d_max");
    }
    sec.check("initial_voltage_fraction", s.initial_voltage_fraction > 0.0 && std::isfinite(s.initial_voltage_fraction),
              "> 0");
    auto noise = sec.child("noise");
    s.noise.v_amplitude = noise.number("v_amplitude", 0.0);
    s.noise.i_amplitude = noise.number("i_amplitude", 0.0);
    const int seed = noise.integer("seed", 1);
    noise.check("v_amplitude", s.noise.v_amplitude >= 0.0, ">= 0");
    noise.check("i_amplitude", s.noise.i_amplitude >= 0.0, ">= 0");
    noise.check("seed", seed >= 0, ">= 0");
    s.noise.seed = static_cast<std::uint64_t>(seed);
    noise.reject_unknown();
    sec.reject_unknown();
  }
  {
    auto sec = top.child("metrics");
    cfg.metrics.settle_tolerance = sec.number("settle_tolerance", cfg.metrics.settle_tolerance);
    cfg.metrics.settle_hold = sec.number("settle_hold", cfg.metrics.settle_hold);
    cfg.metrics.control_interval = cfg.sim.control_interval;
    sec.check("settle_tolerance", cfg.metrics.settle_tolerance > 0.0, "> 0");
    sec.check("settle_hold", cfg.metrics.settle_hold >= 0.0, ">= 0");
    sec.reject_unknown();
  }
  {
    auto sec = top.child("output");
    cfg.output_dir = sec.text("dir", cfg.output_dir.string());
    sec.reject_unknown();
  }
  top.reject_unknown();
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path), path);
}

PvArray build_array(const ScenarioConfig& cfg) {
  ArrayConfig array;
  array.n_series = cfg.panel.cells_in_series * cfg.panels_in_series;
  array.n_parallel = cfg.strings_in_parallel;
  return PvArray(cfg.panel.cell_params(), array, cfg.solver);
}

BuckBoostModel build_converter(const ScenarioConfig& cfg, const OracleCache& oracle) {
  BuckBoostModel model;
  model.d_min = cfg.d_min;
  model.d_max = cfg.d_max;
  if (cfg.v_bus) {
    model.v_bus = *cfg.v_bus;
  } else {
    const auto& cell = oracle.array().params();
    model.v_bus = oracle.get(EnvCondition{cell.g_ref, cell.t_ref}).v_mpp;
  }
  model.validate();
  return model;
}

EnvProfile build_profile(const ScenarioConfig& cfg) {
  if (cfg.profile_source == ProfileSource::BuiltinTable1) return builtin_table1_profile();
  return load_profile_csv(cfg.profile_path, cfg.sim.duration);
}

}  // namespace mppt
