#pragma once

// Ground-truth maximum power point by exhaustive voltage sweep plus golden-section refinement.

#include <cstddef>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "mppt/pv_model.hpp"

namespace mppt {

struct OracleSettings {
  int grid_points = 2000;
  double refine_tolerance = 1e-6;  // V, final bracket width
  double slope_bound = 1e-3;       // |dP/dV| at v_mpp must stay below slope_bound * p_mpp / v_mpp
};

struct MppResult {
  double v_mpp = 0.0;
  double i_mpp = 0.0;
  double v_oc = 0.0;
  EnvCondition env;

  double p_mpp() const { return v_mpp * i_mpp; }
};

/// Throws on solver failures. For g = 0 returns the all-zero result.
MppResult find_mpp(const PvArray& array, const EnvCondition& env, const OracleSettings& settings = {});

/// Uniform grid of `points` voltages over [0, V_oc(env)], endpoints included.
std::vector<IVPoint> sweep_pv_curve(const PvArray& array, const EnvCondition& env, int points);

/// Central finite-difference dP/dV with step h.
double power_slope(const PvArray& array, const EnvCondition& env, double v, double h);

/// Memoizes find_mpp by exact (g, t). Safe for concurrent use.
class OracleCache {
 public:
  explicit OracleCache(PvArray array, OracleSettings settings = {});

  MppResult get(const EnvCondition& env) const;
  std::size_t size() const;
  const PvArray& array() const { return array_; }

 private:
  PvArray array_;
  OracleSettings settings_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<double, double>, MppResult> entries_;
};

}  // namespace mppt
