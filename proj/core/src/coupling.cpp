#include "cqed/coupling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "cqed/rng.hpp"
#include "cqed/textio.hpp"

namespace cqed {
namespace {

constexpr double kPlanck = 6.62607015e-34;

double physical_clamp(double y, SweepQuantity q) {
  if (q == SweepQuantity::Transmission) return std::clamp(y, 0.0, 1.0);
  return std::max(y, 0.0);
}

// Fritsch-Carlson slopes for a monotone piecewise cubic Hermite interpolant.
std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> secant(n - 1), m(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  m[0] = secant[0];
  m[n - 1] = secant[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (secant[i - 1] * secant[i] <= 0.0) {
      m[i] = 0.0;
    } else {
      // weighted harmonic mean (Fritsch-Butland form)
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
      m[i] = (w1 + w2) / (w1 / secant[i - 1] + w2 / secant[i]);
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (secant[i] == 0.0) {
      m[i] = m[i + 1] = 0.0;
      continue;
    }
    const double a = m[i] / secant[i], b = m[i + 1] / secant[i];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      m[i] = tau * a * secant[i];
      m[i + 1] = tau * b * secant[i];
    }
  }
  return m;
}

}  // namespace

bool DispersiveSystem::dispersive() const {
  return std::abs(detuning_mhz()) > kDispersiveRatio * g_mhz;
}

void validate(const DispersiveSystem& s) {
  if (!(s.g_mhz > 0.0)) throw InputError("coupling g must be > 0");
  if (!(s.f_bare_ghz > 0.0)) throw InputError("bare cavity frequency must be > 0");
  if (s.kappa_mhz < 0.0 || s.gamma_q_mhz < 0.0) throw InputError("linewidths must be >= 0");
}

double dispersive_shift_two_level(double g_mhz, double delta_mhz, Warnings* warnings) {
  if (delta_mhz == 0.0) {
    throw ResonanceError("zero detuning: dispersive shift undefined, use anti_crossing");
  }
  if (std::abs(delta_mhz) < kDispersiveRatio * std::abs(g_mhz)) {
    warn(warnings, "|delta| < 10 g: outside the dispersive regime");
  }
  return g_mhz * g_mhz / delta_mhz;
}

double dispersive_shift_transmon(double g_mhz, double delta_mhz, double alpha_mhz) {
  if (delta_mhz == 0.0) throw ResonanceError("zero detuning in dispersive shift");
  if (delta_mhz + alpha_mhz == 0.0) {
    throw ResonanceError("straddling pole: delta = -alpha");
  }
  return g_mhz * g_mhz * alpha_mhz / (delta_mhz * (delta_mhz + alpha_mhz));
}

double coupling_from_shift(double chi_mhz, double delta_mhz) {
  const double product = chi_mhz * delta_mhz;
  if (!(product > 0.0)) {
    throw InputError("chi and delta must share a sign to define g = sqrt(chi delta)");
  }
  return std::sqrt(product);
}

Branches anti_crossing(double f_bare_ghz, double f_q_ghz, double g_mhz) {
  if (!(g_mhz > 0.0)) throw InputError("coupling g must be > 0");
  const double g = g_mhz * 1e-3;
  const double sum = f_bare_ghz + f_q_ghz;
  const double half_diff = 0.5 * (f_bare_ghz - f_q_ghz);
  const double split = std::sqrt(half_diff * half_diff + g * g);
  const double f_plus = 0.5 * sum + split;
  // Sterbenz: sum - f_plus is exact, so f_plus + f_minus reproduces sum.
  return {f_plus, sum - f_plus};
}

double cavity_weight_upper(double f_bare_ghz, double f_q_ghz, double g_mhz) {
  const double d = f_bare_ghz - f_q_ghz;
  const double g = g_mhz * 1e-3;
  return 0.5 * (1.0 + d / std::sqrt(d * d + 4.0 * g * g));
}

GateSweepModel::GateSweepModel(std::vector<double> v_gate, std::vector<double> values,
                               SweepQuantity quantity, Interpolation kind)
    : v_(std::move(v_gate)), y_(std::move(values)), quantity_(quantity), kind_(kind) {
  if (v_.size() < 2 || v_.size() != y_.size()) {
    throw InputError("sweep table needs >= 2 (V_G, value) samples of equal length");
  }
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!std::isfinite(v_[i]) || !std::isfinite(y_[i])) {
      throw InputError("sweep table contains non-finite entries");
    }
    if (i > 0 && !(v_[i] > v_[i - 1])) {
      throw InputError("sweep table V_G samples must be strictly increasing");
    }
    const bool ok = quantity_ == SweepQuantity::Transmission ? (y_[i] >= 0.0 && y_[i] <= 1.0)
                                                             : y_[i] >= 0.0;
    if (!ok) throw InputError("sweep table value outside the physical range");
  }
  if (kind_ == Interpolation::MonotoneCubic) slopes_ = monotone_slopes(v_, y_);
}

double GateSweepModel::value_at(double v) const {
  if (v <= v_.front()) return y_.front();
  if (v >= v_.back()) return y_.back();
  const auto it = std::upper_bound(v_.begin(), v_.end(), v);
  const std::size_t i = static_cast<std::size_t>(it - v_.begin()) - 1;
  const double h = v_[i + 1] - v_[i];
  const double t = (v - v_[i]) / h;
  if (kind_ == Interpolation::Linear) {
    return physical_clamp(y_[i] + t * (y_[i + 1] - y_[i]), quantity_);
  }
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double y = h00 * y_[i] + h10 * h * slopes_[i] + h01 * y_[i + 1] + h11 * h * slopes_[i + 1];
  return physical_clamp(y, quantity_);
}

GateSweepModel nanowire_profile(const NanowireProfile& p, SweepQuantity quantity) {
  if (p.samples < 2 || !(p.v_max > p.v_min) || !(p.v_width > 0.0) || p.max_value < 0.0 ||
      p.wiggle < 0.0 || p.wiggle >= 1.0) {
    throw InputError("invalid nanowire profile parameters");
  }
  Rng rng(p.seed);
  const auto v = linspace(p.v_min, p.v_max, p.samples);
  std::vector<double> y(v.size());
  double walk = 0.0;
  const double step = 0.35;
  for (std::size_t i = 0; i < v.size(); ++i) {
    walk = std::clamp(walk + step * rng.gaussian(), -1.0, 1.0);
    const double x = (v[i] - p.v_pinch) / p.v_width;
    const double ramp = x <= 0.0 ? 0.0 : std::pow(std::tanh(x), 2);
    y[i] = physical_clamp(p.max_value * ramp * (1.0 + p.wiggle * walk), quantity);
  }
  return GateSweepModel(v, std::move(y), quantity, Interpolation::MonotoneCubic);
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw InputError("linspace needs n >= 1");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

namespace {

QubitSpectrum solve_point(const GateSweepModel& model, const SweepSystem& sys, double value,
                          bool check) {
  SolverOptions opts;
  opts.basis = sys.basis;
  opts.check_convergence = check;
  opts.keep_levels = 3;
  if (model.quantity() == SweepQuantity::JosephsonEnergy) {
    return transmon_levels(TransmonParams{sys.ec_mhz, value, sys.ng}, opts);
  }
  return gatemon_levels(GatemonParams{sys.ec_mhz, sys.gap_mhz, {value}, sys.ng}, opts);
}

}  // namespace

SweepResult gate_sweep(const GateSweepModel& model, const std::vector<double>& v_gate,
                       const SweepSystem& sys) {
  if (!(sys.g_mhz > 0.0) || !(sys.f_bare_ghz > 0.0) || !(sys.ec_mhz > 0.0)) {
    throw InputError("sweep system needs f_bare > 0, g > 0 and EC > 0");
  }
  if (model.quantity() == SweepQuantity::Transmission && !(sys.gap_mhz > 0.0)) {
    throw InputError("transmission sweep needs a superconducting gap > 0");
  }
  for (std::size_t i = 1; i < v_gate.size(); ++i) {
    if (!(v_gate[i] > v_gate[i - 1])) throw InputError("sweep V_G points must be increasing");
  }

  std::vector<double> values(v_gate.size());
  std::size_t hardest = 0;
  for (std::size_t i = 0; i < v_gate.size(); ++i) {
    values[i] = model.value_at(v_gate[i]);
    if (values[i] > values[hardest]) hardest = i;
  }

  SweepResult result;
  result.points.reserve(v_gate.size());
  for (std::size_t i = 0; i < v_gate.size(); ++i) {
    SweepPoint pt;
    pt.v_gate = v_gate[i];
    if (values[i] <= 0.0) {
      pt.regime = SweepRegime::PinchOff;
      pt.f_c_ghz = sys.f_bare_ghz;
      pt.f_plus_ghz = sys.f_bare_ghz;
      result.points.push_back(pt);
      continue;
    }
    QubitSpectrum spec;
    try {
      // The largest EJ or T needs the widest basis; check convergence there.
      spec = solve_point(model, sys, values[i], i == hardest);
    } catch (const InputError& e) {
      throw InputError("at V_G = " + format_double(v_gate[i]) + ": " + e.what());
    } catch (const Error& e) {
      throw ConvergenceError("at V_G = " + format_double(v_gate[i]) + ": " + e.what());
    }
    pt.f_q_mhz = spec.f01;
    const double delta = sys.f_bare_ghz * 1e3 - spec.f01;
    const Branches br = anti_crossing(sys.f_bare_ghz, spec.f01 * 1e-3, sys.g_mhz);
    pt.f_plus_ghz = br.f_plus_ghz;
    pt.f_minus_ghz = br.f_minus_ghz;
    if (std::abs(delta) > kDispersiveRatio * sys.g_mhz) {
      pt.regime = SweepRegime::Dispersive;
      pt.chi_mhz = dispersive_shift_two_level(sys.g_mhz, delta);
      pt.f_c_ghz = sys.f_bare_ghz + pt.chi_mhz * 1e-3;
    } else {
      pt.regime = SweepRegime::Resonant;
      const bool upper_is_cavity =
          cavity_weight_upper(sys.f_bare_ghz, spec.f01 * 1e-3, sys.g_mhz) >= 0.5;
      pt.f_c_ghz = upper_is_cavity ? br.f_plus_ghz : br.f_minus_ghz;
      pt.chi_mhz = (pt.f_c_ghz - sys.f_bare_ghz) * 1e3;
    }
    result.points.push_back(pt);
  }
  return result;
}

const char* to_string(SweepRegime regime) {
  switch (regime) {
    case SweepRegime::PinchOff:
      return "pinch_off";
    case SweepRegime::Dispersive:
      return "dispersive";
    case SweepRegime::Resonant:
      return "resonant";
  }
  return "unknown";
}

std::string to_csv(const SweepResult& r) {
  std::string out = "V_G,f_Q_MHz,chi_MHz,f_C_GHz,f_plus_GHz,f_minus_GHz\n";
  for (const auto& p : r.points) {
    out += format_double(p.v_gate) + ',' + format_double(p.f_q_mhz) + ',' +
           format_double(p.chi_mhz) + ',' + format_double(p.f_c_ghz) + ',' +
           format_double(p.f_plus_ghz) + ',' + format_double(p.f_minus_ghz) + '\n';
  }
  return out;
}

nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : r.points) {
    points.push_back({{"V_G", p.v_gate},
                      {"f_Q_MHz", p.f_q_mhz},
                      {"chi_MHz", p.chi_mhz},
                      {"f_C_GHz", p.f_c_ghz},
                      {"f_plus_GHz", p.f_plus_ghz},
                      {"f_minus_GHz", p.f_minus_ghz},
                      {"regime", to_string(p.regime)}});
  }
  return {{"points", points}};
}

double mean_photon_number(double power_dbm, double f_c_ghz, double kappa_mhz,
                          double line_attenuation_db) {
  if (!(kappa_mhz > 0.0) || !(f_c_ghz > 0.0)) {
    throw InputError("photon number needs kappa > 0 and f_C > 0");
  }
  const double watts = 1e-3 * std::pow(10.0, (power_dbm - line_attenuation_db) / 10.0);
  return watts / (kPlanck * f_c_ghz * 1e9 * kappa_mhz * 1e6);
}

double critical_photon_number(double g_mhz, double delta_mhz) {
  const double r = delta_mhz / (2.0 * g_mhz);
  return r * r;
}

double dispersive_weight(double n_mean, double n_crit, double width) {
  if (n_mean <= 0.0) return 1.0;
  const double x = (std::log(n_mean) - std::log(n_crit)) / width;
  if (x > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(x));
}

std::vector<double> power_dependence(const DispersiveSystem& system,
                                     const std::vector<double>& powers_dbm,
                                     const PowerModel& model) {
  validate(system);
  if (!(model.crossover_width > 0.0)) throw InputError("crossover width must be > 0");
  const double delta = system.detuning_mhz();
  const double chi = dispersive_shift_two_level(system.g_mhz, delta);
  const double n_crit = critical_photon_number(system.g_mhz, delta);
  std::vector<double> f_c;
  f_c.reserve(powers_dbm.size());
  for (double p : powers_dbm) {
    const double w =
        std::isinf(p) && p < 0.0
            ? 1.0
            : dispersive_weight(mean_photon_number(p, system.f_bare_ghz, system.kappa_mhz,
                                                   model.line_attenuation_db),
                                n_crit, model.crossover_width);
    f_c.push_back(system.f_bare_ghz + chi * w * 1e-3);
  }
  return f_c;
}

double purcell_induced_cavity_loss(double g_mhz, double delta_mhz, double gamma_q_mhz,
                                   double f_c_ghz, double qi_intrinsic, Warnings* warnings) {
  if (delta_mhz == 0.0) throw ResonanceError("zero detuning: Purcell loss undefined");
  if (!(gamma_q_mhz >= 0.0) || !(qi_intrinsic > 0.0) || !(f_c_ghz > 0.0)) {
    throw InputError("Purcell loss needs gamma_q >= 0, Qi > 0, f_C > 0");
  }
  if (std::abs(delta_mhz) <= kDispersiveRatio * g_mhz) {
    warn(warnings, "|delta| <= 10 g: inverse Purcell estimate outside the dispersive regime");
  }
  const double ratio = g_mhz / delta_mhz;
  const double kappa_induced = ratio * ratio * gamma_q_mhz;
  const double f_mhz = f_c_ghz * 1e3;
  return f_mhz / (f_mhz / qi_intrinsic + kappa_induced);
}

}  // namespace cqed
