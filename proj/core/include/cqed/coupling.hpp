#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqed/error.hpp"
#include "cqed/spectra.hpp"

namespace cqed {

// Detuning convention throughout: delta = f_bare - f_Q (MHz).

inline constexpr double kDispersiveRatio = 10.0;

struct DispersiveSystem {
  double f_bare_ghz = 0.0;
  double g_mhz = 0.0;
  QubitSpectrum qubit{};
  double kappa_mhz = 0.0;
  double gamma_q_mhz = 0.0;

  double detuning_mhz() const { return f_bare_ghz * 1e3 - qubit.f01; }
  bool dispersive() const;
};

void validate(const DispersiveSystem& s);

double dispersive_shift_two_level(double g_mhz, double delta_mhz, Warnings* warnings = nullptr);

// Multi-level correction chi = g^2 alpha / (delta (delta + alpha)).
double dispersive_shift_transmon(double g_mhz, double delta_mhz, double alpha_mhz);

double coupling_from_shift(double chi_mhz, double delta_mhz);

struct Branches {
  double f_plus_ghz = 0.0;
  double f_minus_ghz = 0.0;
};

// Single-excitation Jaynes-Cummings eigenfrequencies.
Branches anti_crossing(double f_bare_ghz, double f_q_ghz, double g_mhz);

// Fraction of the upper branch that is photon-like; the lower branch has
// the complement.
double cavity_weight_upper(double f_bare_ghz, double f_q_ghz, double g_mhz);

enum class SweepQuantity { JosephsonEnergy, Transmission };
enum class Interpolation { Linear, MonotoneCubic };

class GateSweepModel {
 public:
  GateSweepModel(std::vector<double> v_gate, std::vector<double> values, SweepQuantity quantity,
                 Interpolation kind = Interpolation::MonotoneCubic);

  // Clamped to the physical range of the quantity; constant outside the table.
  double value_at(double v_gate) const;

  SweepQuantity quantity() const { return quantity_; }
  Interpolation interpolation() const { return kind_; }
  const std::vector<double>& v_gate() const { return v_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::vector<double> v_;
  std::vector<double> y_;
  std::vector<double> slopes_;
  SweepQuantity quantity_;
  Interpolation kind_;
};

// Smooth pinch-off ramp with bounded random-walk wiggles, standing in for
// the non-monotonic critical current of a nanowire junction.
struct NanowireProfile {
  double v_min = 0.0;
  double v_max = 10.0;
  int samples = 101;
  double v_pinch = 2.0;   // below this the junction carries no supercurrent
  double v_width = 1.5;   // ramp width
  double max_value = 0.0; // EJ in MHz or T
  double wiggle = 0.1;    // relative amplitude bound of the fluctuations
  std::uint64_t seed = 1;
};

GateSweepModel nanowire_profile(const NanowireProfile& profile, SweepQuantity quantity);

struct SweepSystem {
  double f_bare_ghz = 0.0;
  double g_mhz = 0.0;
  double ec_mhz = 0.0;
  double gap_mhz = 0.0;  // gatemon only
  double ng = 0.0;
  int basis = 0;
};

enum class SweepRegime { PinchOff, Dispersive, Resonant };

struct SweepPoint {
  double v_gate = 0.0;
  double f_q_mhz = 0.0;
  double chi_mhz = 0.0;
  double f_c_ghz = 0.0;
  double f_plus_ghz = 0.0;
  double f_minus_ghz = 0.0;
  SweepRegime regime = SweepRegime::PinchOff;
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

std::vector<double> linspace(double a, double b, int n);

SweepResult gate_sweep(const GateSweepModel& model, const std::vector<double>& v_gate,
                       const SweepSystem& system);

std::string to_csv(const SweepResult& r);
nlohmann::json to_json(const SweepResult& r);
const char* to_string(SweepRegime regime);

struct PowerModel {
  double line_attenuation_db = 0.0;
  double crossover_width = 1.0;  // logistic width in ln(n) units
};

double mean_photon_number(double power_dbm, double f_c_ghz, double kappa_mhz,
                          double line_attenuation_db);
double critical_photon_number(double g_mhz, double delta_mhz);

// Fraction of the dispersive shift still present at a given power: 1 at low
// power, 0 at high power, logistic in ln(n) centred on n_crit.
double dispersive_weight(double n_mean, double n_crit, double width);

std::vector<double> power_dependence(const DispersiveSystem& system,
                                     const std::vector<double>& powers_dbm,
                                     const PowerModel& model = {});

// Inverse Purcell: adds (g/delta)^2 gamma_q to the intrinsic cavity loss.
double purcell_induced_cavity_loss(double g_mhz, double delta_mhz, double gamma_q_mhz,
                                   double f_c_ghz, double qi_intrinsic,
                                   Warnings* warnings = nullptr);

}  // namespace cqed
