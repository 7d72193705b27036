#include "mppt/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>

#include <fmt/format.h>

#include "mppt/error.hpp"
#include "mppt/trace_io.hpp"

namespace mppt {

namespace {

struct Setup {
  ScenarioConfig cfg;
  std::filesystem::path out_dir;
  std::optional<OracleCache> oracle;
  std::optional<EnvProfile> profile;
  BuckBoostModel converter;
};

// Everything that can fail because of the configuration happens here.
void prepare(Setup& s, const CommandOptions& opts, bool need_profile) {
  s.cfg = load_scenario(opts.config);
  if (opts.profile) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(*opts.profile, ec)) {
      throw ConfigError(fmt::format("--profile: profile CSV '{}' not found", opts.profile->string()));
    }
    s.cfg.profile_source = ProfileSource::Csv;
    s.cfg.profile_path = *opts.profile;
  }
  s.out_dir = opts.out ? *opts.out : s.cfg.output_dir;
  try {
    s.oracle.emplace(build_array(s.cfg), s.cfg.oracle);
    if (need_profile) {
      s.profile.emplace(build_profile(s.cfg));
      s.converter = build_converter(s.cfg, *s.oracle);
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(fmt::format("{}: {}", opts.config.string(), e.what()));
  } catch (const InconsistentDatasheetError& e) {
    throw ConfigError(fmt::format("{}: panel: {}", opts.config.string(), e.what()));
  }
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SimulationError& e) {
    err << "error: " << e.what() << " (" << e.partial_trace().size() << " records before failure)\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
}

std::string num(double x) { return fmt::format("{:.6g}", x); }

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, ControllerKind kind, const OracleCache& oracle,
                       const EnvProfile& profile) {
  const BuckBoostModel converter = build_converter(cfg, oracle);
  RunResult result;
  result.kind = kind;
  result.trace = run_simulation(oracle, converter, kind, cfg.controller, profile, cfg.sim);
  MetricsSettings ms = cfg.metrics;
  ms.control_interval = cfg.sim.control_interval;
  result.metrics = compute_metrics(result.trace, ms);
  return result;
}

std::vector<RunResult> run_comparison(const ScenarioConfig& cfg, const OracleCache& oracle,
                                      const EnvProfile& profile) {
  std::vector<std::future<RunResult>> jobs;
  jobs.reserve(kAllControllers.size());
  for (const auto kind : kAllControllers) {
    jobs.push_back(std::async(std::launch::async, [&cfg, &oracle, &profile, kind] {
      return run_scenario(cfg, kind, oracle, profile);
    }));
  }
  std::vector<RunResult> results;
  results.reserve(jobs.size());
  for (auto& job : jobs) results.push_back(job.get());
  return results;
}

ComparisonSummary summarize_comparison(const std::vector<RunResult>& results, double large_step_w_m2) {
  auto find = [&](ControllerKind kind) -> const RunResult& {
    const auto it = std::find_if(results.begin(), results.end(), [kind](const RunResult& r) { return r.kind == kind; });
    if (it == results.end()) throw InvalidArgument(fmt::format("comparison lacks {}", to_string(kind)));
    return *it;
  };
  const auto& conventional = find(ControllerKind::Conventional);
  const auto& fixed = find(ControllerKind::RevisedFixedBound);
  const auto& adaptive = find(ControllerKind::RevisedAdaptiveBound);

  ComparisonSummary s;
  s.energy_conventional = conventional.metrics.energy_deficit;
  s.energy_adaptive = adaptive.metrics.energy_deficit;
  s.overshoot_fixed = fixed.metrics.max_voltage_overshoot();
  s.overshoot_adaptive = adaptive.metrics.max_voltage_overshoot();
  s.energy_ordering = s.energy_conventional > s.energy_adaptive;
  s.overshoot_no_worse = s.overshoot_adaptive <= s.overshoot_fixed;

  const auto& fs = fixed.metrics.segments;
  const auto& as = adaptive.metrics.segments;
  if (fs.size() == as.size()) {
    for (std::size_t k = 1; k < fs.size(); ++k) {
      if (std::abs(fs[k].env.g - fs[k - 1].env.g) < large_step_w_m2) continue;
      if (as[k].max_voltage_overshoot < fs[k].max_voltage_overshoot) s.overshoot_strict = true;
    }
  }
  return s;
}

void write_comparison_report(std::ostream& out, const std::vector<RunResult>& results,
                             const ComparisonSummary& summary) {
  out << fmt::format("{:<28}", "metric");
  for (const auto& r : results) out << fmt::format("{:>24}", to_string(r.kind));
  out << '\n';
  auto row = [&](std::string_view label, auto getter) {
    out << fmt::format("{:<28}", label);
    for (const auto& r : results) out << fmt::format("{:>24}", getter(r.metrics));
    out << '\n';
  };
  row("energy_deficit_j", [](const TrackingMetrics& m) { return num(m.energy_deficit); });
  row("mean_relative_deviation", [](const TrackingMetrics& m) { return num(m.mean_relative_deviation); });
  row("oscillation_fraction", [](const TrackingMetrics& m) { return num(m.oscillation_fraction); });
  row("post_settle_steps", [](const TrackingMetrics& m) { return fmt::format("{}", m.post_settle_steps); });
  row("max_voltage_overshoot_v", [](const TrackingMetrics& m) { return num(m.max_voltage_overshoot()); });

  const std::size_t n_seg = results.empty() ? 0 : results.front().metrics.segments.size();
  for (std::size_t k = 0; k < n_seg; ++k) {
    const auto& seg = results.front().metrics.segments[k];
    out << fmt::format("\nsegment {} (t = {} s, {} s, G = {} W/m^2, T = {} K)\n", k, num(seg.t_start),
                       num(seg.duration), num(seg.env.g), num(seg.env.t));
    auto seg_row = [&](std::string_view label, auto getter) {
      out << fmt::format("  {:<26}", label);
      for (const auto& r : results) {
        const auto& m = r.metrics.segments;
        out << fmt::format("{:>24}", k < m.size() ? getter(m[k]) : std::string("-"));
      }
      out << '\n';
    };
    seg_row("status", [](const SegmentMetrics& m) { return std::string(to_string(m.status)); });
    seg_row("settling_time_s", [](const SegmentMetrics& m) {
      return m.status == SettleStatus::Settled ? num(m.settling_time) : std::string("-");
    });
    seg_row("max_voltage_overshoot_v", [](const SegmentMetrics& m) { return num(m.max_voltage_overshoot); });
    seg_row("first_hold_time_s", [](const SegmentMetrics& m) {
      return m.first_hold_time ? num(*m.first_hold_time) : std::string("-");
    });
    seg_row("end_relative_deviation", [](const SegmentMetrics& m) { return num(m.end_relative_deviation); });
  }

  auto verdict = [](bool ok) { return ok ? "holds" : "VIOLATED"; };
  out << "\norderings\n";
  out << fmt::format("  energy_deficit conventional ({}) > revised-adaptive-bound ({}): {}\n",
                     num(summary.energy_conventional), num(summary.energy_adaptive), verdict(summary.energy_ordering));
  out << fmt::format("  max_voltage_overshoot revised-adaptive-bound ({}) <= revised-fixed-bound ({}): {}\n",
                     num(summary.overshoot_adaptive), num(summary.overshoot_fixed), verdict(summary.overshoot_no_worse));
  out << fmt::format("  overshoot strictly smaller on a segment entered by a >= 300 W/m^2 step: {}\n",
                     verdict(summary.overshoot_strict));
}

int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Setup s;
    prepare(s, opts, true);
    const RunResult result = run_scenario(s.cfg, s.cfg.kind, *s.oracle, *s.profile);
    ensure_dir(s.out_dir);
    write_trace_csv(s.out_dir / "trace.csv", result.trace);
    write_metrics_report(s.out_dir / "metrics.txt", result.metrics);
    if (!opts.quiet) {
      out << fmt::format("{}: {} steps, energy deficit {} J, wrote {}\n", to_string(result.kind),
                         result.trace.size(), num(result.metrics.energy_deficit), s.out_dir.string());
    }
    return kExitOk;
  });
}

int cmd_compare(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Setup s;
    prepare(s, opts, true);
    const auto results = run_comparison(s.cfg, *s.oracle, *s.profile);
    const auto summary = summarize_comparison(results);
    ensure_dir(s.out_dir);
    for (const auto& r : results) {
      write_trace_csv(s.out_dir / fmt::format("trace_{}.csv", to_string(r.kind)), r.trace);
    }
    {
      const auto path = s.out_dir / "comparison.txt";
      std::ofstream file(path, std::ios::binary);
      if (!file) throw Error(fmt::format("cannot write '{}'", path.string()));
      write_comparison_report(file, results, summary);
    }
    if (!opts.quiet) write_comparison_report(out, results, summary);
    return kExitOk;
  });
}

int cmd_oracle(const CommandOptions& opts, double g, double temp_c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Setup s;
    prepare(s, opts, false);
    const EnvCondition env{g, celsius_to_kelvin(temp_c)};
    try {
      env.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    const MppResult mpp = s.oracle->get(env);
    const auto curve = sweep_pv_curve(s.oracle->array(), env, s.cfg.oracle.grid_points);
    ensure_dir(s.out_dir);
    write_curve_csv(s.out_dir / "pv_curve.csv", curve);
    out << fmt::format("v_mpp = {:.9g}\ni_mpp = {:.9g}\np_mpp = {:.9g}\nv_oc = {:.9g}\n", mpp.v_mpp, mpp.i_mpp,
                       mpp.p_mpp(), mpp.v_oc);
    return kExitOk;
  });
}

}  // namespace mppt
