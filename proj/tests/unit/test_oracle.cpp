#include <catch_amalgamated.hpp>

#include <random>
#include <thread>
#include <vector>

#include "mppt/error.hpp"
#include "mppt/mpp_oracle.hpp"
#include "reference_model.hpp"

using namespace mppt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("STC maximum power is near the 150 W rating", "[oracle]") {
  const auto module = ref::bp_module();
  const MppResult r = find_mpp(module, {1000.0, 298.0});
  CHECK(r.p_mpp() >= 142.5);
  CHECK(r.p_mpp() <= 157.5);
  CHECK_THAT(r.v_oc, WithinRel(43.5, 1e-9));
  CHECK(r.v_mpp > 30.0);
  CHECK(r.v_mpp < 38.0);
  CHECK_THAT(r.i_mpp, WithinAbs(module.current({1000.0, 298.0}, r.v_mpp), 1e-12));
}

TEST_CASE("oracle agrees with a brute-force sweep of the reference model", "[oracle]") {
  const auto module = ref::bp_module();
  const ref::Cell cell(ref::bp_cell());
  for (const EnvCondition env : {EnvCondition{1000.0, 298.0}, EnvCondition{200.0, 298.0}, EnvCondition{20.0, 298.0},
                                 EnvCondition{650.0, 340.0}}) {
    const MppResult r = find_mpp(module, env);
    const auto brute = ref::brute_mpp(cell, 72, env.g, env.t, r.v_oc, 4000);
    CHECK(r.p_mpp() >= brute.p - 1e-9);
    CHECK_THAT(r.p_mpp(), WithinRel(brute.p, 1e-5));
    CHECK_THAT(r.v_mpp, WithinAbs(brute.v, 2.0 * r.v_oc / 4000));
  }
}

TEST_CASE("oracle optimality over random conditions", "[oracle][property]") {
  const auto module = ref::bp_module();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> g_dist(20.0, 1000.0), t_dist(273.0, 348.0);
  for (int k = 0; k < 50; ++k) {
    const EnvCondition env{g_dist(rng), t_dist(rng)};
    const MppResult r = find_mpp(module, env);
    const double h = 1e-3 * r.v_oc;
    CHECK(module.operating_point(env, r.v_mpp - h).p() <= r.p_mpp());
    CHECK(module.operating_point(env, r.v_mpp + h).p() <= r.p_mpp());
    CHECK(std::abs(power_slope(module, env, r.v_mpp, 1e-5 * r.v_oc)) < 1e-3 * r.p_mpp() / r.v_mpp);
  }
}

TEST_CASE("zero irradiance gives an empty result", "[oracle]") {
  const MppResult r = find_mpp(ref::bp_module(), {0.0, 298.0});
  CHECK(r.p_mpp() == 0.0);
  CHECK(r.v_oc == 0.0);
}

TEST_CASE("maximum power rises with irradiance and falls with temperature", "[oracle][property]") {
  const auto module = ref::bp_module();
  double prev = 0.0;
  for (double g : {20.0, 100.0, 300.0, 600.0, 1000.0}) {
    const double p = find_mpp(module, {g, 298.0}).p_mpp();
    CHECK(p > prev);
    prev = p;
  }
  CHECK(find_mpp(module, {1000.0, 340.0}).p_mpp() < find_mpp(module, {1000.0, 298.0}).p_mpp());
}

TEST_CASE("P-V sweep is monotone in voltage with a single power peak", "[oracle]") {
  const auto module = ref::bp_module();
  const auto curve = sweep_pv_curve(module, {500.0, 310.0}, 500);
  REQUIRE(curve.size() == 500);
  CHECK(curve.front().v == 0.0);
  CHECK_THAT(curve.back().i, WithinAbs(0.0, 1e-9));
  int direction_changes = 0;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    CHECK(curve[k].v > curve[k - 1].v);
    if (k >= 2) {
      const bool up_before = curve[k - 1].p() > curve[k - 2].p();
      const bool up_now = curve[k].p() > curve[k - 1].p();
      if (up_before != up_now) ++direction_changes;
    }
  }
  CHECK(direction_changes == 1);
}

TEST_CASE("settings are validated", "[oracle]") {
  OracleSettings s;
  s.grid_points = 10;
  CHECK_THROWS_AS(find_mpp(ref::bp_module(), {1000.0, 298.0}, s), InvalidArgument);
}

TEST_CASE("cache returns identical results under concurrent use", "[oracle]") {
  const OracleCache cache(ref::bp_module());
  const std::vector<double> gs = {20.0, 200.0, 500.0, 1000.0};
  std::vector<std::vector<MppResult>> seen(4);
  std::vector<std::thread> threads;
  for (int w = 0; w < 4; ++w) {
    threads.emplace_back([&, w] {
      for (int rep = 0; rep < 3; ++rep) {
        for (double g : gs) seen[w].push_back(cache.get({g, 298.0}));
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(cache.size() == gs.size());
  for (int w = 0; w < 4; ++w) {
    for (std::size_t k = 0; k < seen[w].size(); ++k) {
      const MppResult direct = find_mpp(cache.array(), {gs[k % gs.size()], 298.0});
      CHECK(seen[w][k].v_mpp == direct.v_mpp);
      CHECK(seen[w][k].i_mpp == direct.i_mpp);
    }
  }
}
