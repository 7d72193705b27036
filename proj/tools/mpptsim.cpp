// mpptsim: run, compare and oracle verbs over a scenario file.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mppt/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"MPPT controller simulator"};
  app.require_subcommand(1);

  mppt::CommandOptions opts;
  std::string out_dir;
  std::string profile;
  double g = 1000.0;
  double temp_c = 25.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config, "scenario file (YAML)")->required();
    cmd->add_option("--out", out_dir, "output directory, overrides output.dir");
    cmd->add_flag("--quiet", opts.quiet, "suppress the summary on stdout");
  };

  auto* run = app.add_subcommand("run", "simulate the configured controller, write trace.csv and metrics.txt");
  add_common(run);
  run->add_option("--profile", profile, "environment profile CSV, overrides the configured profile");

  auto* compare = app.add_subcommand("compare", "simulate all three controllers, write traces and comparison.txt");
  add_common(compare);
  compare->add_option("--profile", profile, "environment profile CSV, overrides the configured profile");

  auto* oracle = app.add_subcommand("oracle", "write pv_curve.csv and print the maximum power point");
  add_common(oracle);
  oracle->add_option("--g", g, "irradiance, W/m^2")->capture_default_str();
  oracle->add_option("--temp", temp_c, "cell temperature, deg C")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? mppt::kExitOk : mppt::kExitConfig;
  }

  if (!out_dir.empty()) opts.out = out_dir;
  if (!profile.empty()) opts.profile = profile;

  if (run->parsed()) return mppt::cmd_run(opts, std::cout, std::cerr);
  if (compare->parsed()) return mppt::cmd_compare(opts, std::cout, std::cerr);
  return mppt::cmd_oracle(opts, g, temp_c, std::cout, std::cerr);
}
