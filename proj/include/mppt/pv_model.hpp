#pragma once

// Single-diode photovoltaic cell model and its uniform series/parallel scaling.

#include <limits>

namespace mppt {

struct PhysicalConstants {
  double q = 1.602e-19;  // elementary charge, C
  double k = 1.38e-23;   // Boltzmann constant, J/K
};

/// Which denominator the band-gap expression uses. `MinusT0` is (T - 1108);
/// `Varshni` is the textbook silicon form (T + 1108).
enum class BandGapForm { MinusT0, Varshni };

/// Datasheet-level parameters of one cell.
struct CellParams {
  double i_sc_ref = 0.0;   // A
  double v_oc_ref = 0.0;   // V
  double alpha = 0.0;      // 1/K, relative temperature coefficient of I_SC
  double n = 1.3;          // diode ideality factor
  double r_p = std::numeric_limits<double>::infinity();  // ohm; infinite means neglected
  double dv_di_oc = 0.0;   // ohm, dV/dI at open circuit (negative)
  double t_ref = 298.0;    // K
  double g_ref = 1000.0;   // W/m^2

  /// Throws InvalidArgument naming the first violated field.
  void validate() const;
};

struct ArrayConfig {
  int n_series = 1;    // cells in series per string
  int n_parallel = 1;  // parallel strings

  void validate() const;
};

struct EnvCondition {
  double g = 1000.0;  // irradiance, W/m^2
  double t = 298.0;   // cell temperature, K

  void validate() const;
  friend bool operator==(const EnvCondition&, const EnvCondition&) = default;
};

struct IVPoint {
  double v = 0.0;
  double i = 0.0;
  double p() const { return v * i; }
};

struct SolverSettings {
  double tolerance = 1e-9;     // A, bound on |residual|
  int max_iterations = 100;
  double max_exponent = 700.0; // guard on exp() arguments
  BandGapForm band_gap = BandGapForm::MinusT0;
};

double celsius_to_kelvin(double celsius);
double kelvin_to_celsius(double kelvin);

/// Band-gap energy in eV.
double band_gap(double t, BandGapForm form = BandGapForm::MinusT0);

double photon_current(const CellParams& params, const EnvCondition& env);

/// I_0 at the reference temperature.
double reference_saturation_current(const CellParams& params, const PhysicalConstants& constants = {},
                                    const SolverSettings& settings = {});

/// I_0 at env.t, scaled from the reference value by the cubic and band-gap factors.
double saturation_current(const CellParams& params, const EnvCondition& env,
                          const PhysicalConstants& constants = {}, const SolverSettings& settings = {});

/// Small-signal resistance of the diode at the reference open circuit, nkT/(I_0 q exp(qV_oc/nkT)).
double open_circuit_diode_resistance(const CellParams& params, const PhysicalConstants& constants = {},
                                     const SolverSettings& settings = {});

/// R_S from the datasheet slope at open circuit. Throws InconsistentDatasheetError if negative.
double derive_series_resistance(const CellParams& params, const PhysicalConstants& constants = {},
                                const SolverSettings& settings = {});

/// Residual of the implicit cell equation, I_Ph - I_d - (V + I R_S)/R_P - I.
double cell_residual(const CellParams& params, double r_s, const EnvCondition& env, double v, double i,
                     const PhysicalConstants& constants = {}, const SolverSettings& settings = {});

/// Terminal current of one cell at voltage v. Damped Newton with bisection fallback.
double cell_current(const CellParams& params, double r_s, const EnvCondition& env, double v,
                    const PhysicalConstants& constants = {}, const SolverSettings& settings = {});

/// Voltage at which the cell current is zero.
double cell_open_circuit_voltage(const CellParams& params, const EnvCondition& env,
                                 const PhysicalConstants& constants = {}, const SolverSettings& settings = {});

IVPoint array_iv(const CellParams& params, double r_s, const ArrayConfig& cfg, const EnvCondition& env,
                 double v_array, const PhysicalConstants& constants = {}, const SolverSettings& settings = {});

/// Identical, identically lit cells wired as n_series x n_parallel, with R_S derived once.
class PvArray {
 public:
  PvArray(CellParams params, ArrayConfig cfg, SolverSettings settings = {}, PhysicalConstants constants = {});

  const CellParams& params() const { return params_; }
  const ArrayConfig& config() const { return cfg_; }
  const SolverSettings& settings() const { return settings_; }
  const PhysicalConstants& constants() const { return constants_; }
  double series_resistance() const { return r_s_; }

  IVPoint operating_point(const EnvCondition& env, double v_array) const;
  double current(const EnvCondition& env, double v_array) const { return operating_point(env, v_array).i; }
  double open_circuit_voltage(const EnvCondition& env) const;

 private:
  CellParams params_;
  ArrayConfig cfg_;
  SolverSettings settings_;
  PhysicalConstants constants_;
  double r_s_;
};

}  // namespace mppt
