#pragma once

// The run / compare / oracle verbs behind the mpptsim executable.

#include <array>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "mppt/metrics.hpp"
#include "mppt/scenario.hpp"
#include "mppt/simulation.hpp"

namespace mppt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;      // overrides output.dir
  std::optional<std::filesystem::path> profile;  // overrides the profile with a CSV
  bool quiet = false;
};

struct RunResult {
  ControllerKind kind = ControllerKind::RevisedAdaptiveBound;
  std::vector<SimRecord> trace;
  TrackingMetrics metrics;
};

inline constexpr std::array<ControllerKind, 3> kAllControllers = {
    ControllerKind::Conventional, ControllerKind::RevisedFixedBound, ControllerKind::RevisedAdaptiveBound};

/// One closed-loop run of `kind` on the scenario.
RunResult run_scenario(const ScenarioConfig& cfg, ControllerKind kind, const OracleCache& oracle,
                       const EnvProfile& profile);

/// All three controllers on the same scenario, concurrently, sharing one oracle cache.
/// Results come back in kAllControllers order.
std::vector<RunResult> run_comparison(const ScenarioConfig& cfg, const OracleCache& oracle, const EnvProfile& profile);

struct ComparisonSummary {
  double energy_conventional = 0.0;
  double energy_adaptive = 0.0;
  double overshoot_fixed = 0.0;
  double overshoot_adaptive = 0.0;
  bool energy_ordering = false;     // conventional deficit > adaptive deficit
  bool overshoot_no_worse = false;  // adaptive max overshoot <= fixed max overshoot
  bool overshoot_strict = false;    // strictly smaller on some segment entered by a step of at least 300 W/m^2
};

ComparisonSummary summarize_comparison(const std::vector<RunResult>& results, double large_step_w_m2 = 300.0);

void write_comparison_report(std::ostream& out, const std::vector<RunResult>& results,
                             const ComparisonSummary& summary);

int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_compare(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_oracle(const CommandOptions& opts, double g, double temp_c, std::ostream& out, std::ostream& err);

}  // namespace mppt
