#include <catch_amalgamated.hpp>

#include <cmath>

#include "mppt/error.hpp"
#include "mppt/metrics.hpp"
#include "mppt/simulation.hpp"
#include "reference_model.hpp"

using namespace mppt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const OracleCache& shared_oracle() {
  static const OracleCache cache(ref::bp_module());
  return cache;
}

BuckBoostModel stc_converter() {
  return BuckBoostModel{shared_oracle().get({1000.0, 298.0}).v_mpp};
}

EnvProfile constant(double g, double duration) { return EnvProfile({{0.0, {g, 298.0}}}, duration); }

}  // namespace

TEST_CASE("trace length follows duration and interval", "[sim]") {
  SimConfig cfg;
  CHECK(cfg.step_count() == 500);
  cfg.duration = 0.01;
  CHECK(cfg.step_count() == 1);
  cfg.duration = 2.0;
  CHECK(cfg.step_count() == 200);
  const auto trace = run_simulation(shared_oracle(), stc_converter(), ControllerKind::RevisedAdaptiveBound, {},
                                    builtin_table1_profile(), SimConfig{});
  REQUIRE(trace.size() == 500);
  for (std::size_t k = 0; k < trace.size(); ++k) CHECK_THAT(trace[k].t, WithinAbs(0.01 * k, 1e-12));
}

TEST_CASE("starting on the MPP holds from the second step", "[sim]") {
  const auto conv = stc_converter();
  const MppResult mpp = shared_oracle().get({1000.0, 298.0});
  SimConfig cfg;
  cfg.duration = 1.0;
  cfg.initial_duty = duty_for_voltage(conv, mpp.v_mpp);
  const auto trace = run_simulation(shared_oracle(), conv, ControllerKind::RevisedAdaptiveBound, {},
                                    constant(1000.0, 1.0), cfg);
  for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k].action == Action::HeldAtMpp);
  for (const auto& r : trace) CHECK(std::abs(r.p_deviation) / r.p_mpp < 1e-6);
}

TEST_CASE("harvested power never exceeds the oracle maximum", "[sim][property]") {
  for (auto kind : {ControllerKind::Conventional, ControllerKind::RevisedFixedBound,
                    ControllerKind::RevisedAdaptiveBound}) {
    const auto trace = run_simulation(shared_oracle(), stc_converter(), kind, {}, builtin_table1_profile(), {});
    for (const auto& r : trace) {
      CHECK(r.p <= r.p_mpp * (1.0 + 1e-9) + 1e-9);
      CHECK(r.p_deviation >= -1e-6);
      CHECK(r.i >= 0.0);
      CHECK(r.d >= 0.05);
      CHECK(r.d <= 0.95);
    }
  }
}

TEST_CASE("records are causal and consistent", "[sim][property]") {
  const auto conv = stc_converter();
  const auto prof = builtin_table1_profile();
  const auto trace = run_simulation(shared_oracle(), conv, ControllerKind::RevisedAdaptiveBound, {}, prof, {});
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& r = trace[k];
    const auto env = prof.at(r.t);
    CHECK(r.g == env.g);
    CHECK(r.temp == env.t);
    const double v_cmd = terminal_voltage(conv, r.d).v;
    const MppResult mpp = shared_oracle().get(env);
    CHECK_THAT(r.v, WithinRel(std::min(v_cmd, mpp.v_oc), 1e-12));
    CHECK_THAT(r.p, WithinRel(r.v * r.i, 1e-12));
    CHECK(r.p_mpp == mpp.p_mpp());
    if (k == 0) CHECK(std::isnan(r.slope_term));
    if (k > 0 && trace[k - 1].action == Action::HeldAtMpp) CHECK(r.d == trace[k - 1].d);
  }
}

TEST_CASE("auto initial duty places the array below the first MPP", "[sim]") {
  const auto conv = stc_converter();
  const auto trace = run_simulation(shared_oracle(), conv, ControllerKind::RevisedFixedBound, {},
                                    builtin_table1_profile(), {});
  const double vmp = shared_oracle().get({1000.0, 298.0}).v_mpp;
  CHECK_THAT(trace.front().v, WithinRel(0.9 * vmp, 1e-12));
}

TEST_CASE("simulation is deterministic", "[sim][property]") {
  SimConfig cfg;
  cfg.noise.v_amplitude = 0.05;
  cfg.noise.i_amplitude = 0.01;
  cfg.noise.seed = 42;
  const auto a = run_simulation(ref::bp_module(), stc_converter(), ControllerKind::RevisedAdaptiveBound, {},
                                builtin_table1_profile(), cfg);
  const auto b = run_simulation(ref::bp_module(), stc_converter(), ControllerKind::RevisedAdaptiveBound, {},
                                builtin_table1_profile(), cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].v == b[k].v);
    CHECK(a[k].d == b[k].d);
    CHECK(a[k].action == b[k].action);
  }
}

TEST_CASE("revised controller converges after every long segment", "[sim]") {
  const auto trace = run_simulation(shared_oracle(), stc_converter(), ControllerKind::RevisedAdaptiveBound, {},
                                    builtin_table1_profile(), {});
  const auto m = compute_metrics(trace);
  for (const auto& seg : m.segments) {
    if (seg.count < 40) continue;
    CHECK(seg.first_hold_time.has_value());
    CHECK(seg.end_relative_deviation < 0.01);
  }
}

TEST_CASE("operating point pins to open circuit above V_oc", "[sim]") {
  // A bus this high with d near d_min commands far more than V_oc.
  const BuckBoostModel conv{200.0};
  SimConfig cfg;
  cfg.duration = 0.05;
  cfg.initial_duty = 0.1;
  const auto trace = run_simulation(shared_oracle(), conv, ControllerKind::RevisedAdaptiveBound, {},
                                    constant(1000.0, 1.0), cfg);
  CHECK_THAT(trace.front().v, WithinRel(shared_oracle().get({1000.0, 298.0}).v_oc, 1e-12));
  CHECK(trace.front().i == 0.0);
  CHECK(trace[1].slope_term == -1e6);
  CHECK(trace[2].d > trace[1].d);  // record 1 carries the probe, record 2 the move away from V_oc
}

TEST_CASE("simulation config is validated", "[sim]") {
  SimConfig cfg;
  cfg.control_interval = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.duration = 0.001;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.initial_duty = 1.2;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}
