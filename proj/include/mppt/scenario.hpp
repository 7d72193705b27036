#pragma once

// Scenario files: YAML, one file per experiment. See config/scenarios/ for examples.

#include <filesystem>
#include <limits>
#include <optional>
#include <string>

#include "mppt/controllers.hpp"
#include "mppt/converter.hpp"
#include "mppt/error.hpp"
#include "mppt/metrics.hpp"
#include "mppt/mpp_oracle.hpp"
#include "mppt/profile.hpp"
#include "mppt/pv_model.hpp"
#include "mppt/simulation.hpp"

namespace mppt {

/// Module-level datasheet values. Per-cell parameters follow from cells_in_series.
struct PanelSpec {
  std::string name;
  int cells_in_series = 1;
  double i_sc = 0.0;        // A
  double v_oc = 0.0;        // V, whole panel
  double alpha = 0.0;       // 1/K
  double n = 1.3;
  double dv_di_oc = 0.0;    // ohm, whole panel
  double r_p = std::numeric_limits<double>::infinity();  // ohm, whole panel
  double t_ref = 298.0;     // K
  double g_ref = 1000.0;

  CellParams cell_params() const;
};

enum class ProfileSource { BuiltinTable1, Csv };

struct ScenarioConfig {
  std::string name;
  std::filesystem::path source;  // file the scenario was read from, empty if built in code

  PanelSpec panel;
  int panels_in_series = 1;
  int strings_in_parallel = 1;
  SolverSettings solver;
  OracleSettings oracle;

  std::optional<double> v_bus;  // unset: STC maximum power voltage of the array
  double d_min = 0.05;
  double d_max = 0.95;

  ControllerKind kind = ControllerKind::RevisedAdaptiveBound;
  ControllerParams controller;

  ProfileSource profile_source = ProfileSource::BuiltinTable1;
  std::filesystem::path profile_path;  // resolved against the scenario directory

  SimConfig sim;
  MetricsSettings metrics;
  std::filesystem::path output_dir = "out";
};

/// Parses a scenario. Errors are ConfigError with `file:line: field: reason`.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& source);

class PresetNotFound : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Loads `<name>.yaml` from the preset search path (scenario_dir/presets, scenario_dir/../presets,
/// then the installed preset directory). Throws PresetNotFound when no file matches.
PanelSpec load_panel_preset(const std::string& name, const std::filesystem::path& scenario_dir);

PvArray build_array(const ScenarioConfig& cfg);
BuckBoostModel build_converter(const ScenarioConfig& cfg, const OracleCache& oracle);
EnvProfile build_profile(const ScenarioConfig& cfg);

}  // namespace mppt
