#include <catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

const fs::path kExe = MPPTSIM_EXE;
const fs::path kConfig = MPPT_CONFIG_DIR;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mpptsim_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Result run(const std::string& args, const fs::path& work) {
  const std::string cmd = "\"" + kExe.string() + "\" " + args + " > \"" + (work / "stdout.txt").string() +
                          "\" 2> \"" + (work / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(work / "stdout.txt");
  r.err = slurp(work / "stderr.txt");
  return r;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("run writes a 500-row trace for the cloud transient", "[cli]") {
  const auto work = scratch("run_table1");
  const auto r = run("run --config \"" + (kConfig / "scenarios" / "table1.yaml").string() + "\" --out \"" +
                         (work / "out").string() + "\" --quiet",
                     work);
  REQUIRE(r.code == 0);
  const auto rows = lines_of(work / "out" / "trace.csv");
  REQUIRE(rows.size() == 501);
  CHECK(rows.front() == "t_s,irradiance_w_m2,temperature_k,v_v,i_a,p_w,duty,delta_d,delta_d_max,p_mpp_w,v_mpp_v,"
                        "p_deviation_w,action,slope_term");
  const std::string metrics = slurp(work / "out" / "metrics.txt");
  CHECK_THAT(metrics, ContainsSubstring("energy_deficit_j = "));
  CHECK_THAT(metrics, ContainsSubstring("segment_15_status = "));
  CHECK(r.out.empty());
}

TEST_CASE("duration equal to the interval gives one row", "[cli]") {
  const auto work = scratch("one_row");
  write(work / "one.yaml",
        "panel:\n  preset: bp_sx150\nsimulation:\n  control_interval: 0.01\n  duration: 0.01\n");
  fs::create_directories(work / "presets");
  fs::copy_file(kConfig / "presets" / "bp_sx150.yaml", work / "presets" / "bp_sx150.yaml");
  const auto r = run("run --config \"" + (work / "one.yaml").string() + "\" --out \"" + (work / "out").string() + "\"",
                     work);
  REQUIRE(r.code == 0);
  CHECK(lines_of(work / "out" / "trace.csv").size() == 2);
  CHECK_THAT(r.out, ContainsSubstring("1 steps"));
}

TEST_CASE("missing profile CSV fails naming the path", "[cli]") {
  const auto work = scratch("missing_profile");
  write(work / "bad.yaml", "panel:\n  preset: bp_sx150\nprofile:\n  source: csv\n  path: nowhere/cloud.csv\n");
  auto r = run("run --config \"" + (work / "bad.yaml").string() + "\" --out \"" + (work / "out").string() + "\"",
               work);
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("nowhere/cloud.csv"));

  r = run("run --config \"" + (kConfig / "scenarios" / "table1.yaml").string() + "\" --profile \"" +
              (work / "absent.csv").string() + "\" --out \"" + (work / "out").string() + "\"",
          work);
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("absent.csv"));
}

TEST_CASE("profile override replaces the configured profile", "[cli]") {
  const auto work = scratch("override");
  const auto r = run("run --config \"" + (kConfig / "scenarios" / "table1.yaml").string() + "\" --profile \"" +
                         (kConfig / "profiles" / "constant_stc.csv").string() + "\" --out \"" +
                         (work / "out").string() + "\" --quiet",
                     work);
  REQUIRE(r.code == 0);
  const auto rows = lines_of(work / "out" / "trace.csv");
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].rfind(",1000,", 20) != std::string::npos);
}

TEST_CASE("config errors exit with 1, solver errors with 2", "[cli]") {
  const auto work = scratch("exit_codes");
  fs::create_directories(work / "presets");
  fs::copy_file(kConfig / "presets" / "bp_sx150.yaml", work / "presets" / "bp_sx150.yaml");
  write(work / "bad.yaml", "panel:\n  preset: bp_sx150\ncontroller:\n  acc: 0.5\n");
  auto r = run("run --config \"" + (work / "bad.yaml").string() + "\"", work);
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("controller.acc"));
  CHECK_THAT(r.err, ContainsSubstring("bad.yaml:4"));

  write(work / "stiff.yaml",
        "panel:\n  preset: bp_sx150\nmodel:\n  solver_tolerance: 1.0e-30\n  max_iterations: 1\n");
  r = run("run --config \"" + (work / "stiff.yaml").string() + "\" --out \"" + (work / "out").string() + "\"", work);
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());

  r = run("run", work);
  CHECK(r.code == 1);
  r = run("launch --config x", work);
  CHECK(r.code == 1);
}

TEST_CASE("compare is byte-identical across runs", "[cli]") {
  const auto work = scratch("compare");
  const std::string cfg = "\"" + (kConfig / "scenarios" / "table1.yaml").string() + "\"";
  REQUIRE(run("compare --config " + cfg + " --out \"" + (work / "a").string() + "\" --quiet", work).code == 0);
  REQUIRE(run("compare --config " + cfg + " --out \"" + (work / "b").string() + "\" --quiet", work).code == 0);
  for (const char* name : {"trace_conventional.csv", "trace_revised-fixed-bound.csv",
                           "trace_revised-adaptive-bound.csv", "comparison.txt"}) {
    INFO(name);
    const std::string a = slurp(work / "a" / name);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(work / "b" / name));
  }
  const std::string report = slurp(work / "a" / "comparison.txt");
  CHECK_THAT(report, ContainsSubstring("orderings"));
  CHECK_THAT(report, ContainsSubstring("revised-adaptive-bound"));
}

TEST_CASE("oracle prints the maximum power point and writes the curve", "[cli]") {
  const auto work = scratch("oracle");
  const auto r = run("oracle --config \"" + (kConfig / "scenarios" / "table1.yaml").string() +
                         "\" --g 1000 --temp 25 --out \"" + (work / "out").string() + "\"",
                     work);
  REQUIRE(r.code == 0);
  const auto pos = r.out.find("p_mpp = ");
  REQUIRE(pos != std::string::npos);
  const double p_mpp = std::stod(r.out.substr(pos + 8));
  CHECK(p_mpp >= 142.5);
  CHECK(p_mpp <= 157.5);

  const auto rows = lines_of(work / "out" / "pv_curve.csv");
  REQUIRE(rows.size() > 100);
  CHECK(rows.front() == "v_v,i_a,p_w");
  double prev_v = -1.0, prev_p = -1.0;
  int turns = 0;
  bool rising = true;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    std::istringstream row(rows[k]);
    std::string v, i, p;
    std::getline(row, v, ',');
    std::getline(row, i, ',');
    std::getline(row, p, ',');
    const double vv = std::stod(v), pp = std::stod(p);
    CHECK(vv > prev_v);
    if (k > 1 && (pp > prev_p) != rising) {
      rising = !rising;
      ++turns;
    }
    prev_v = vv;
    prev_p = pp;
  }
  CHECK(turns == 1);
}
