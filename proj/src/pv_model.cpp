#include "mppt/pv_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <fmt/core.h>

#include "mppt/error.hpp"

namespace mppt {

namespace {

void check_exponent(double arg, const SolverSettings& settings, const char* where) {
  if (!std::isfinite(arg) || std::abs(arg) > settings.max_exponent) {
    throw NumericRangeError(fmt::format("{}: exponent {} outside +/-{}", where, arg, settings.max_exponent));
  }
}

double guarded_exp(double arg, const SolverSettings& settings, const char* where) {
  check_exponent(arg, settings, where);
  return std::exp(arg);
}

double thermal_voltage(double n, double t, const PhysicalConstants& c) { return n * c.k * t / c.q; }

// Everything the implicit equation needs at one environment condition.
struct CellEquation {
  double i_ph;
  double i_0;
  double v_t;
  double r_s;
  double r_p;
  double v;
  const SolverSettings* settings;

  double exponent(double i) const { return (v + i * r_s) / v_t; }
  bool in_range(double i) const { return std::abs(exponent(i)) <= settings->max_exponent; }

  double residual(double i) const {
    const double arg = exponent(i);
    check_exponent(arg, *settings, "cell_current");
    const double shunt = std::isinf(r_p) ? 0.0 : (v + i * r_s) / r_p;
    return i_ph - i_0 * std::expm1(arg) - shunt - i;
  }

  double derivative(double i) const {
    const double shunt = std::isinf(r_p) ? 0.0 : r_s / r_p;
    return -i_0 * r_s / v_t * std::exp(exponent(i)) - shunt - 1.0;
  }
};

CellEquation make_equation(const CellParams& params, double r_s, const EnvCondition& env, double v,
                           const PhysicalConstants& constants, const SolverSettings& settings) {
  return CellEquation{photon_current(params, env),
                      saturation_current(params, env, constants, settings),
                      thermal_voltage(params.n, env.t, constants),
                      r_s,
                      params.r_p,
                      v,
                      &settings};
}

double bisect(const CellEquation& eq, double lo, double hi, int& iterations) {
  const auto& settings = *eq.settings;
  // f is strictly decreasing in I; widen until the bracket straddles the root.
  double width = std::max(hi - lo, 1e-6);
  for (int k = 0; k < 64 && eq.residual(lo) < 0.0; ++k) {
    lo -= width;
    width *= 2.0;
  }
  width = std::max(hi - lo, 1e-6);
  for (int k = 0; k < 64 && (!eq.in_range(hi) || eq.residual(hi) > 0.0); ++k) {
    if (!eq.in_range(hi)) {
      hi = 0.5 * (lo + hi);
      continue;
    }
    hi += width;
    width *= 2.0;
  }
  double f_lo = eq.residual(lo);
  double f_hi = eq.residual(hi);
  if (f_lo < 0.0 || f_hi > 0.0) {
    throw SolverError(fmt::format("cell_current: no bracket at V={}", eq.v), iterations,
                      std::min(std::abs(f_lo), std::abs(f_hi)));
  }
  double mid = 0.5 * (lo + hi);
  double f_mid = eq.residual(mid);
  const int limit = iterations + std::max(settings.max_iterations, 200);
  while (iterations < limit) {
    ++iterations;
    mid = 0.5 * (lo + hi);
    f_mid = eq.residual(mid);
    if (f_mid == 0.0 || (std::abs(f_mid) < settings.tolerance && hi - lo < 1e-13 * std::max(1.0, std::abs(mid)))) {
      return mid;
    }
    if (f_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) break;
  }
  if (std::abs(f_mid) < settings.tolerance) return mid;
  throw SolverError(fmt::format("cell_current: bisection did not converge at V={}", eq.v), iterations,
                    std::abs(f_mid));
}

}  // namespace

void CellParams::validate() const {
  auto fail = [](const char* field, const char* rule) {
    throw InvalidArgument(fmt::format("CellParams.{} must satisfy {}", field, rule));
  };
  if (!(i_sc_ref > 0.0)) fail("i_sc_ref", "> 0");
  if (!(v_oc_ref > 0.0)) fail("v_oc_ref", "> 0");
  if (!std::isfinite(alpha)) fail("alpha", "finite");
  if (!(n >= 1.0) || !std::isfinite(n)) fail("n", ">= 1");
  if (!(r_p > 0.0)) fail("r_p", "> 0 (or infinite)");
  if (!(dv_di_oc < 0.0)) fail("dv_di_oc", "< 0");
  if (!(t_ref > 0.0)) fail("t_ref", "> 0");
  if (!(g_ref > 0.0)) fail("g_ref", "> 0");
}

void ArrayConfig::validate() const {
  if (n_series < 1) throw InvalidArgument("ArrayConfig.n_series must be >= 1");
  if (n_parallel < 1) throw InvalidArgument("ArrayConfig.n_parallel must be >= 1");
}

void EnvCondition::validate() const {
  if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidArgument(fmt::format("EnvCondition.g must be >= 0, got {}", g));
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument(fmt::format("EnvCondition.t must be > 0 K, got {}", t));
}

double celsius_to_kelvin(double celsius) { return celsius + 273.15; }
double kelvin_to_celsius(double kelvin) { return kelvin - 273.15; }

double band_gap(double t, BandGapForm form) {
  if (!(t > 0.0)) throw InvalidArgument(fmt::format("band_gap: temperature must be > 0 K, got {}", t));
  const double denom = form == BandGapForm::MinusT0 ? t - 1108.0 : t + 1108.0;
  if (denom == 0.0) throw SingularTemperatureError("band_gap: T = 1108 K is a pole of the band-gap expression");
  return 1.16 - 0.000702 * t * t / denom;
}

double photon_current(const CellParams& params, const EnvCondition& env) {
  return (env.g / params.g_ref) * params.i_sc_ref * (1.0 + params.alpha * (env.t - params.t_ref));
}

double reference_saturation_current(const CellParams& params, const PhysicalConstants& constants,
                                    const SolverSettings& settings) {
  const double arg = constants.q * params.v_oc_ref / (params.n * constants.k * params.t_ref);
  check_exponent(arg, settings, "reference_saturation_current");
  return params.i_sc_ref / std::expm1(arg);
}

double saturation_current(const CellParams& params, const EnvCondition& env, const PhysicalConstants& constants,
                          const SolverSettings& settings) {
  if (!(env.t > 0.0)) throw InvalidArgument("saturation_current: temperature must be > 0 K");
  const double i0_ref = reference_saturation_current(params, constants, settings);
  if (env.t == params.t_ref) return i0_ref;
  const double eg = band_gap(env.t, settings.band_gap);
  const double arg = -constants.q * eg / (params.n * constants.k) * (1.0 / env.t - 1.0 / params.t_ref);
  const double ratio = env.t / params.t_ref;
  return i0_ref * ratio * ratio * ratio * guarded_exp(arg, settings, "saturation_current");
}

double open_circuit_diode_resistance(const CellParams& params, const PhysicalConstants& constants,
                                     const SolverSettings& settings) {
  const double i0_ref = reference_saturation_current(params, constants, settings);
  const double arg = constants.q * params.v_oc_ref / (params.n * constants.k * params.t_ref);
  return params.n * constants.k * params.t_ref /
         (i0_ref * constants.q * guarded_exp(arg, settings, "open_circuit_diode_resistance"));
}

double derive_series_resistance(const CellParams& params, const PhysicalConstants& constants,
                                const SolverSettings& settings) {
  const double diode_term = open_circuit_diode_resistance(params, constants, settings);
  const double r_s = -params.dv_di_oc - diode_term;
  if (r_s < 0.0) {
    throw InconsistentDatasheetError(fmt::format(
        "derived series resistance is negative ({} ohm): |dV/dI| at V_oc = {} is smaller than the diode term {}", r_s,
        -params.dv_di_oc, diode_term));
  }
  return r_s;
}

double cell_residual(const CellParams& params, double r_s, const EnvCondition& env, double v, double i,
                     const PhysicalConstants& constants, const SolverSettings& settings) {
  return make_equation(params, r_s, env, v, constants, settings).residual(i);
}

double cell_current(const CellParams& params, double r_s, const EnvCondition& env, double v,
                    const PhysicalConstants& constants, const SolverSettings& settings) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(fmt::format("cell_current: voltage must be >= 0, got {}", v));
  const CellEquation eq = make_equation(params, r_s, env, v, constants, settings);

  const double lo = -0.1 * eq.i_ph;
  const double hi = 1.2 * eq.i_ph;
  // Zero-R_S estimate as the starting point.
  double i = eq.i_ph - eq.i_0 * std::expm1(std::min(v / eq.v_t, settings.max_exponent)) -
             (std::isinf(eq.r_p) ? 0.0 : v / eq.r_p);
  i = std::clamp(i, std::min(lo, hi), std::max(lo, hi));

  int iterations = 0;
  bool newton_ok = eq.in_range(i);
  while (newton_ok && iterations < settings.max_iterations) {
    ++iterations;
    const double r = eq.residual(i);
    if (r == 0.0) return i;
    const double step = -r / eq.derivative(i);
    if (std::abs(r) < settings.tolerance && std::abs(step) <= 1e-13 * std::max(1.0, std::abs(i))) return i + step;

    double lambda = 1.0;
    bool accepted = false;
    while (lambda > 1e-6) {
      const double candidate = i + lambda * step;
      if (eq.in_range(candidate) && std::abs(eq.residual(candidate)) < std::abs(r)) {
        i = candidate;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      if (std::abs(r) < settings.tolerance) return i;
      newton_ok = false;
    }
  }
  if (newton_ok && eq.in_range(i) && std::abs(eq.residual(i)) < settings.tolerance) return i;
  return bisect(eq, lo, hi, iterations);
}

double cell_open_circuit_voltage(const CellParams& params, const EnvCondition& env,
                                 const PhysicalConstants& constants, const SolverSettings& settings) {
  const double i_ph = photon_current(params, env);
  if (!(i_ph > 0.0)) return 0.0;
  const double i_0 = saturation_current(params, env, constants, settings);
  const double v_t = thermal_voltage(params.n, env.t, constants);
  const double v_ideal = v_t * std::log1p(i_ph / i_0);
  if (std::isinf(params.r_p)) return v_ideal;

  // With a finite shunt the root lies in [0, v_ideal]; h is decreasing and concave.
  auto h = [&](double v) { return i_ph - i_0 * std::expm1(v / v_t) - v / params.r_p; };
  double lo = 0.0;
  double hi = v_ideal;
  double v = v_ideal;
  for (int it = 0; it < settings.max_iterations; ++it) {
    const double hv = h(v);
    if (std::abs(hv) < settings.tolerance * 1e-3 || hi - lo < 1e-15) return v;
    if (hv > 0.0) lo = v; else hi = v;
    const double dh = -i_0 / v_t * std::exp(v / v_t) - 1.0 / params.r_p;
    double next = v - hv / dh;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    v = next;
  }
  if (std::abs(h(v)) < settings.tolerance) return v;
  throw SolverError("open-circuit voltage did not converge", settings.max_iterations, std::abs(h(v)));
}

IVPoint array_iv(const CellParams& params, double r_s, const ArrayConfig& cfg, const EnvCondition& env,
                 double v_array, const PhysicalConstants& constants, const SolverSettings& settings) {
  const double v_cell = v_array / cfg.n_series;
  const double i_cell = cell_current(params, r_s, env, v_cell, constants, settings);
  return IVPoint{v_array, cfg.n_parallel * i_cell};
}

PvArray::PvArray(CellParams params, ArrayConfig cfg, SolverSettings settings, PhysicalConstants constants)
    : params_(std::move(params)), cfg_(cfg), settings_(settings), constants_(constants) {
  params_.validate();
  cfg_.validate();
  r_s_ = derive_series_resistance(params_, constants_, settings_);
}

IVPoint PvArray::operating_point(const EnvCondition& env, double v_array) const {
  return array_iv(params_, r_s_, cfg_, env, v_array, constants_, settings_);
}

double PvArray::open_circuit_voltage(const EnvCondition& env) const {
  return cfg_.n_series * cell_open_circuit_voltage(params_, env, constants_, settings_);
}

}  // namespace mppt
