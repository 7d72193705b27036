#include <catch_amalgamated.hpp>

#include <vector>

#include "mppt/error.hpp"
#include "mppt/metrics.hpp"

using namespace mppt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SimRecord rec(double t, double g, double v, double v_mpp, double p, double p_mpp, Action a) {
  SimRecord r;
  r.t = t;
  r.g = g;
  r.temp = 298.0;
  r.v = v;
  r.v_mpp = v_mpp;
  r.p = p;
  r.p_mpp = p_mpp;
  r.p_deviation = p_mpp - p;
  r.action = a;
  return r;
}

}  // namespace

TEST_CASE("constant deficit integrates by the rectangle rule", "[metrics]") {
  std::vector<SimRecord> trace;
  for (int k = 0; k < 100; ++k) trace.push_back(rec(0.01 * k, 1000.0, 30.0, 30.0, 140.0, 150.0, Action::MovedLeft));
  const auto m = compute_metrics(trace);
  CHECK_THAT(m.energy_deficit, WithinRel(10.0, 1e-12));
  CHECK_THAT(m.mean_relative_deviation, WithinRel(10.0 / 150.0, 1e-12));
}

TEST_CASE("holding the MPP from the start settles at zero", "[metrics]") {
  std::vector<SimRecord> trace;
  for (int k = 0; k < 50; ++k) trace.push_back(rec(0.01 * k, 500.0, 30.0, 30.0, 75.0, 75.0, Action::HeldAtMpp));
  const auto m = compute_metrics(trace);
  REQUIRE(m.segments.size() == 1);
  CHECK(m.segments[0].status == SettleStatus::Settled);
  CHECK(m.segments[0].settling_time == 0.0);
  CHECK(m.segments[0].first_hold_time == 0.0);
  CHECK(m.oscillation_fraction == 0.0);
  CHECK(m.post_settle_steps == 50);
  CHECK(m.energy_deficit == 0.0);
}

TEST_CASE("settling needs the full hold window", "[metrics]") {
  std::vector<SimRecord> trace;
  // 0.00-0.19 s: 5 % off; 0.20-0.25: within 1 %; 0.26: 2 % off; 0.27 onward: within 1 %.
  for (int k = 0; k < 60; ++k) {
    double p = 100.0;
    if (k < 20) p = 95.0;
    else if (k == 26) p = 98.0;
    else p = 99.5;
    trace.push_back(rec(0.01 * k, 800.0, 30.0, 30.0, p, 100.0, k >= 40 ? Action::HeldAtMpp : Action::MovedRight));
  }
  const auto m = compute_metrics(trace);
  REQUIRE(m.segments.size() == 1);
  CHECK(m.segments[0].status == SettleStatus::Settled);
  CHECK_THAT(m.segments[0].settling_time, WithinAbs(0.27, 1e-12));
  CHECK(m.post_settle_steps == 33);
  CHECK_THAT(m.oscillation_fraction, WithinRel(13.0 / 33.0, 1e-12));
  CHECK_THAT(*m.segments[0].first_hold_time, WithinAbs(0.40, 1e-12));
}

TEST_CASE("segments split on environment changes", "[metrics]") {
  std::vector<SimRecord> trace;
  for (int k = 0; k < 30; ++k) trace.push_back(rec(0.01 * k, 1000.0, 30.0, 30.0, 150.0, 150.0, Action::HeldAtMpp));
  for (int k = 30; k < 35; ++k) trace.push_back(rec(0.01 * k, 200.0, 30.0, 29.0, 20.0, 30.0, Action::MovedLeft));
  for (int k = 35; k < 60; ++k) trace.push_back(rec(0.01 * k, 200.5, 29.0, 29.0, 30.0, 30.0, Action::HeldAtMpp));
  const auto m = compute_metrics(trace);
  REQUIRE(m.segments.size() == 3);
  CHECK(m.segments[1].first_index == 30);
  CHECK(m.segments[1].count == 5);
  CHECK_THAT(m.segments[1].duration, WithinAbs(0.05, 1e-12));
  CHECK(m.segments[1].status == SettleStatus::NotAssessable);
  CHECK(m.segments[2].status == SettleStatus::Settled);
  CHECK_THAT(m.segments[1].end_relative_deviation, WithinRel(10.0 / 30.0, 1e-12));
}

TEST_CASE("overshoot counts only the excursion past the target", "[metrics]") {
  std::vector<SimRecord> trace;
  const double vmp = 30.0;
  const std::vector<double> vs = {28.0, 29.0, 30.4, 30.1, 29.8, 30.0};
  for (std::size_t k = 0; k < vs.size(); ++k) {
    trace.push_back(rec(0.01 * k, 700.0, vs[k], vmp, 100.0, 100.0, Action::MovedRight));
  }
  const auto m = compute_metrics(trace);
  CHECK_THAT(m.segments[0].max_voltage_overshoot, WithinAbs(0.4, 1e-12));
  CHECK_THAT(m.segments[0].max_abs_voltage_error, WithinAbs(2.0, 1e-12));
  CHECK_THAT(m.max_voltage_overshoot(), WithinAbs(0.4, 1e-12));

  std::vector<SimRecord> from_above;
  for (double v : {33.0, 31.0, 29.5, 30.2}) from_above.push_back(rec(0.0, 700.0, v, vmp, 100.0, 100.0, Action::MovedLeft));
  CHECK_THAT(compute_metrics(from_above).segments[0].max_voltage_overshoot, WithinAbs(0.5, 1e-12));
}

TEST_CASE("empty trace is rejected", "[metrics]") {
  CHECK_THROWS_AS(compute_metrics(std::vector<SimRecord>{}), InvalidArgument);
}
