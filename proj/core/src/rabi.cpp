#include "cqed/rabi.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "cqed/error.hpp"
#include "stats.hpp"

namespace cqed {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Line {
  double slope = 0.0;
  double offset = 0.0;
};

Line fit_line(const Samples& s) {
  const double n = static_cast<double>(s.x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    sx += s.x[i];
    sy += s.y[i];
    sxx += s.x[i] * s.x[i];
    sxy += s.x[i] * s.y[i];
  }
  const double den = n * sxx - sx * sx;
  Line l;
  l.slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  l.offset = (sy - l.slope * sx) / n;
  return l;
}

RabiParams unpack(const Eigen::VectorXd& v) { return {v(0), v(1), v(2), v(3), v(4), v(5)}; }

}  // namespace

double rabi_model(const RabiParams& p, double t) {
  return p.amplitude * std::exp(-t / p.t_r_ns) * std::cos(p.omega * t + p.phase) + p.slope * t +
         p.offset;
}

LeastSquaresProblem rabi_problem(const Samples& s) {
  const auto n = static_cast<Eigen::Index>(s.x.size());
  LeastSquaresProblem prob;
  prob.n_residuals = n;
  prob.names = {"amplitude", "t_r_ns", "omega", "phase", "slope", "offset"};
  prob.residuals = [&s, n](const Eigen::VectorXd& v, Eigen::VectorXd& r) {
    r.resize(n);
    const auto p = unpack(v);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = rabi_model(p, s.x[i]) - s.y[i];
  };
  prob.jacobian = [&s, n](const Eigen::VectorXd& v, Eigen::MatrixXd& j) {
    j.resize(n, v.size());
    const auto p = unpack(v);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = s.x[i];
      const double env = std::exp(-t / p.t_r_ns);
      const double c = std::cos(p.omega * t + p.phase), sn = std::sin(p.omega * t + p.phase);
      j(i, 0) = env * c;
      j(i, 1) = p.amplitude * env * c * t / (p.t_r_ns * p.t_r_ns);
      j(i, 2) = -p.amplitude * env * sn * t;
      j(i, 3) = -p.amplitude * env * sn;
      j(i, 4) = t;
      j(i, 5) = 1.0;
    }
  };
  return prob;
}

SpectralPeak periodogram_peak(const Samples& s, int oversample) {
  const std::size_t n = s.x.size();
  const double span = s.x.back() - s.x.front();
  const double dt = span / static_cast<double>(n - 1);
  const double d_omega = kTwoPi / (oversample * span);
  const double nyquist = std::numbers::pi / dt;
  const double omega_min = kTwoPi / span;  // at least one period in the record

  SpectralPeak best;
  std::vector<double> powers;
  for (int j = 1;; ++j) {
    const double w = j * d_omega;
    if (w > nyquist) break;
    if (w < omega_min) continue;
    std::complex<double> acc{};
    for (std::size_t k = 0; k < n; ++k) acc += s.y[k] * std::polar(1.0, -w * s.x[k]);
    const double pw = std::norm(acc);
    powers.push_back(pw);
    if (pw > best.power) {
      best.power = pw;
      best.omega = w;
      best.phase = std::arg(acc);
      best.amplitude = 2.0 * std::abs(acc) / static_cast<double>(n);
    }
  }
  best.median_power = detail::median(std::move(powers));
  return best;
}

RabiFit fit_rabi(const Samples& s, const LmOptions& lm) {
  validate(s, "Rabi time series");
  if (s.x.size() < 20) throw InputError("Rabi fit needs at least 20 samples");

  const Line line = fit_line(s);
  Samples detrended = s;
  double scale = 0.0, rms = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    detrended.y[i] -= line.slope * s.x[i] + line.offset;
    rms += detrended.y[i] * detrended.y[i];
    scale = std::max(scale, std::abs(s.y[i]));
  }
  rms = std::sqrt(rms / static_cast<double>(s.x.size()));
  if (rms <= 1e-12 * std::max(scale, 1e-300)) {
    throw NoFitError("cannot initialise Rabi fit: data are a pure linear background");
  }

  const auto peak = periodogram_peak(detrended);
  if (!(peak.power > 20.0 * peak.median_power)) {
    throw NoFitError("cannot initialise Rabi fit: no spectral peak above noise");
  }

  RabiFit out;
  const double span = s.x.back() - s.x.front();
  out.omega_init = peak.omega;
  out.bin_width = kTwoPi / span;
  if (peak.omega * span / kTwoPi < 3.0) {
    out.warnings.push_back("fewer than 3 oscillation periods in the record");
  }

  const auto prob = rabi_problem(s);
  bool have = false;
  for (double frac : {0.125, 0.33, 1.0}) {
    const double tr0 = frac * span;
    // The periodogram amplitude averages the decaying envelope over the record.
    const double mean_env = tr0 / span * (1.0 - std::exp(-span / tr0));
    Eigen::VectorXd init(6);
    init << peak.amplitude / mean_env, tr0, peak.omega, peak.phase, line.slope, line.offset;
    FitResult fit;
    try {
      fit = lm_minimize(prob, init, lm);
    } catch (const InputError&) {
      continue;
    }
    if (!(fit.params(1) > 0.0) || !fit.params.allFinite()) continue;
    if (!have || (fit.converged && !out.fit.converged) ||
        (fit.converged == out.fit.converged && fit.chi2 < out.fit.chi2)) {
      out.fit = fit;
      have = true;
    }
  }
  if (!have) throw NoFitError("Rabi fit did not reach a positive decay time");

  auto& v = out.fit.params;
  if (v(0) < 0.0) {
    v(0) = -v(0);
    v(3) += std::numbers::pi;
  }
  if (v(2) < 0.0) {
    v(2) = -v(2);
    v(3) = -v(3);
  }
  v(3) = std::remainder(v(3), kTwoPi);
  out.params = unpack(v);
  const auto& e = out.fit.errors;
  out.errors = {e(0), e(1), e(2), e(3), e(4), e(5)};
  if (out.params.amplitude < 2.0 * out.errors.amplitude) {
    out.warnings.push_back("oscillation amplitude consistent with zero");
  }
  return out;
}

nlohmann::json to_json(const RabiFit& fit) {
  const auto& p = fit.params;
  const auto& e = fit.errors;
  return {{"kind", "rabi"},
          {"params",
           {{"amplitude", p.amplitude}, {"t_r_ns", p.t_r_ns}, {"omega_rad_per_ns", p.omega},
            {"phase_rad", p.phase}, {"slope_per_ns", p.slope}, {"offset", p.offset}}},
          {"errors",
           {{"amplitude", e.amplitude}, {"t_r_ns", e.t_r_ns}, {"omega_rad_per_ns", e.omega},
            {"phase_rad", e.phase}, {"slope_per_ns", e.slope}, {"offset", e.offset}}},
          {"chi2", fit.fit.chi2},
          {"iterations", fit.fit.iterations},
          {"converged", fit.fit.converged},
          {"message", fit.fit.message},
          {"warnings", fit.warnings}};
}

}  // namespace cqed
