#include "mppt/mpp_oracle.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "mppt/error.hpp"

namespace mppt {

namespace {

double power_at(const PvArray& array, const EnvCondition& env, double v) {
  return array.operating_point(env, v).p();
}

// Maximizes a unimodal f on [a, b] until the bracket is narrower than tol.
template <typename F>
double golden_section_max(F&& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<IVPoint> sweep_pv_curve(const PvArray& array, const EnvCondition& env, int points) {
  if (points < 2) throw InvalidArgument("sweep_pv_curve: need at least 2 points");
  env.validate();
  const double v_oc = array.open_circuit_voltage(env);
  std::vector<IVPoint> curve;
  curve.reserve(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) {
    const double v = v_oc * static_cast<double>(j) / static_cast<double>(points - 1);
    curve.push_back(array.operating_point(env, v));
  }
  return curve;
}

double power_slope(const PvArray& array, const EnvCondition& env, double v, double h) {
  const double lo = std::max(0.0, v - h);
  const double hi = v + h;
  return (power_at(array, env, hi) - power_at(array, env, lo)) / (hi - lo);
}

MppResult find_mpp(const PvArray& array, const EnvCondition& env, const OracleSettings& settings) {
  if (settings.grid_points < 100) throw InvalidArgument("find_mpp: grid_points must be >= 100");
  if (!(settings.refine_tolerance > 0.0)) throw InvalidArgument("find_mpp: refine_tolerance must be > 0");
  env.validate();

  MppResult result;
  result.env = env;
  if (env.g == 0.0) return result;

  const auto curve = sweep_pv_curve(array, env, settings.grid_points);
  const double v_oc = curve.back().v;
  result.v_oc = v_oc;
  const auto best = std::max_element(curve.begin(), curve.end(),
                                     [](const IVPoint& a, const IVPoint& b) { return a.p() < b.p(); });
  const auto idx = static_cast<std::size_t>(best - curve.begin());
  const double a = curve[idx == 0 ? 0 : idx - 1].v;
  const double b = curve[std::min(idx + 1, curve.size() - 1)].v;

  const double v_star =
      golden_section_max([&](double v) { return power_at(array, env, v); }, a, b, settings.refine_tolerance);
  IVPoint op = array.operating_point(env, v_star);
  if (op.p() < best->p()) op = *best;
  result.v_mpp = op.v;
  result.i_mpp = op.i;

  if (result.p_mpp() > 0.0) {
    const double h = 1e-5 * v_oc;
    const double slope = power_slope(array, env, result.v_mpp, h);
    if (std::abs(slope) > settings.slope_bound * result.p_mpp() / result.v_mpp) {
      throw SolverError(fmt::format("find_mpp: dP/dV = {} at v_mpp = {} exceeds the configured bound", slope,
                                    result.v_mpp),
                        0, std::abs(slope));
    }
  }
  return result;
}

OracleCache::OracleCache(PvArray array, OracleSettings settings)
    : array_(std::move(array)), settings_(settings) {}

MppResult OracleCache::get(const EnvCondition& env) const {
  const auto key = std::make_pair(env.g, env.t);
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  MppResult result = find_mpp(array_, env, settings_);
  std::lock_guard lock(mutex_);
  return entries_.try_emplace(key, result).first->second;
}

std::size_t OracleCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace mppt
