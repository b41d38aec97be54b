#include "cqed/resonator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "stats.hpp"

namespace cqed {
namespace {

using cd = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kThetaLimit = 0.5 * std::numbers::pi - 1e-3;

struct Circle {
  cd center;
  double radius = 0.0;
  bool ok = false;
};

// Kasa algebraic fit: x^2 + y^2 + D x + E y + F = 0 in least squares.
Circle kasa_fit(const std::vector<cd>& z) {
  const auto n = static_cast<Eigen::Index>(z.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = z[i].real();
    a(i, 1) = z[i].imag();
    a(i, 2) = 1.0;
    b(i) = -std::norm(z[i]);
  }
  const Eigen::Vector3d s = a.colPivHouseholderQr().solve(b);
  Circle c;
  c.center = cd(-0.5 * s(0), -0.5 * s(1));
  const double r2 = std::norm(c.center) - s(2);
  c.ok = s.allFinite() && r2 > 0.0;
  c.radius = c.ok ? std::sqrt(r2) : 0.0;
  return c;
}

std::size_t edge_count(std::size_t n) { return std::max<std::size_t>(2, n / 20); }

cd edge_mean(const std::vector<cd>& z) {
  const std::size_t k = edge_count(z.size());
  cd acc{};
  for (std::size_t i = 0; i < k; ++i) acc += z[i] + z[z.size() - 1 - i];
  return acc / static_cast<double>(2 * k);
}

std::vector<cd> remove_delay(const ComplexTrace& t, double tau) {
  std::vector<cd> z(t.values.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = t.values[i] * std::polar(1.0, kTwoPi * t.freqs_ghz[i] * tau);
  }
  return z;
}

// Relative misfit of the best circle through the delay-corrected data.
double circle_misfit(const ComplexTrace& t, double tau) {
  const auto z = remove_delay(t, tau);
  const Circle c = kasa_fit(z);
  if (!c.ok) return std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (const cd& v : z) {
    const double d = std::abs(v - c.center) - c.radius;
    acc += d * d;
  }
  return acc / (c.radius * c.radius * static_cast<double>(z.size()));
}

// The cable delay is the one that makes the data most circular; in narrow
// windows the edge phase slope is dominated by the resonance itself.
double estimate_delay(const ComplexTrace& t) {
  const double span = t.freqs_ghz.back() - t.freqs_ghz.front();
  if (!(span > 0.0)) return 0.0;
  const double limit = 3.0 / span;  // a few extra turns across the window
  const int grid = 400;
  double best_tau = 0.0, best = circle_misfit(t, 0.0);
  for (int k = 0; k <= grid; ++k) {
    const double tau = -limit + 2.0 * limit * k / grid;
    const double m = circle_misfit(t, tau);
    if (m < best) {
      best = m;
      best_tau = tau;
    }
  }
  // Golden-section refinement over the neighbouring grid cells.
  const double cell = 2.0 * limit / grid;
  double lo = best_tau - cell, hi = best_tau + cell;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = circle_misfit(t, x1), f2 = circle_misfit(t, x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = circle_misfit(t, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = circle_misfit(t, x2);
    }
  }
  const double tau = 0.5 * (lo + hi);
  return circle_misfit(t, tau) <= best ? tau : best_tau;
}

// Index of max |z - a| on a lightly smoothed copy, and the half-power band
// of |z - a|^2 around it.
struct DipShape {
  std::size_t center = 0;
  double depth = 0.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
};

DipShape dip_shape(const std::vector<double>& f, const std::vector<cd>& z, cd a) {
  const auto smooth = detail::moving_average(z, 2);
  DipShape d;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double dev = std::abs(smooth[i] - a);
    if (dev > d.depth) {
      d.depth = dev;
      d.center = i;
    }
  }
  const double half = 0.5 * d.depth * d.depth;
  std::size_t lo = d.center, hi = d.center;
  while (lo > 0 && std::norm(smooth[lo - 1] - a) >= half) --lo;
  while (hi + 1 < z.size() && std::norm(smooth[hi + 1] - a) >= half) ++hi;
  const double df = f.size() > 1 ? (f.back() - f.front()) / static_cast<double>(f.size() - 1) : 0;
  d.f_lo = f[lo] - 0.5 * df;
  d.f_hi = f[hi] + 0.5 * df;
  return d;
}

ReflectionParams dip_heuristic(const std::vector<double>& f, const std::vector<cd>& z) {
  ReflectionParams p;
  p.a = edge_mean(z);
  const auto shape = dip_shape(f, z, p.a);
  p.f_r_ghz = f[shape.center];
  p.ql = p.f_r_ghz / std::max(shape.f_hi - shape.f_lo, 1e-12);
  const double depth = std::max(shape.depth / std::max(std::abs(p.a), 1e-300), 1e-6);
  p.qc = 2.0 * p.ql / depth;
  p.theta = 0.0;
  return p;
}

// Derivatives with respect to the packed parameters; A is referenced to
// f_ref so that the delay does not rotate it.
void jacobian_rows(const ReflectionParams& p, double f, bool with_delay, double f_ref, cd* out) {
  const cd i1(0.0, 1.0);
  const double x = (f - p.f_r_ghz) / p.f_r_ghz;
  const cd z = 1.0 / (1.0 + 2.0 * i1 * p.ql * x);
  const cd k = 2.0 * p.ql / (p.qc * std::cos(p.theta)) * std::polar(1.0, p.theta) * z;
  const cd e = std::polar(1.0, -kTwoPi * (f - f_ref) * p.delay_ns);
  const cd ae = p.a * std::polar(1.0, -kTwoPi * f * p.delay_ns);
  const double u = std::tan(p.theta);
  out[0] = e * (1.0 - k);
  out[1] = i1 * e * (1.0 - k);
  out[2] = -ae * k * (1.0 / p.ql - 2.0 * i1 * x * z);
  out[3] = ae * k / p.qc;
  out[4] = -ae * k * (i1 + u) / (1.0 + u * u);
  out[5] = -ae * k * (2.0 * i1 * p.ql * z * f / (p.f_r_ghz * p.f_r_ghz));
  if (with_delay) out[6] = ae * (1.0 - k) * (-i1 * kTwoPi * (f - f_ref));
}

}  // namespace

cd reflection_model(const ReflectionParams& p, double f_ghz) {
  const cd i1(0.0, 1.0);
  const cd resonant = 2.0 * p.ql / (p.qc * std::cos(p.theta)) * std::polar(1.0, p.theta) /
                      (1.0 + 2.0 * i1 * p.ql * (f_ghz - p.f_r_ghz) / p.f_r_ghz);
  return p.a * std::polar(1.0, -kTwoPi * f_ghz * p.delay_ns) * (1.0 - resonant);
}

double derive_qi(double ql, double qc) {
  if (!(ql > 0.0) || !(ql < qc)) {
    throw InputError("nonphysical quality factors: need 0 < Ql < Qc (Ql=" + std::to_string(ql) +
                     ", Qc=" + std::to_string(qc) + ")");
  }
  return 1.0 / (1.0 / ql - 1.0 / qc);
}

double loaded_q(double qi, double qc) {
  if (!(qi > 0.0) || !(qc > 0.0)) throw InputError("quality factors must be > 0");
  return 1.0 / (1.0 / qi + 1.0 / qc);
}

double delay_reference_ghz(const ComplexTrace& trace) {
  return trace.freqs_ghz.empty() ? 0.0
                                 : 0.5 * (trace.freqs_ghz.front() + trace.freqs_ghz.back());
}

Eigen::VectorXd pack_reflection(const ReflectionParams& p, bool with_delay, double f_ref_ghz) {
  Eigen::VectorXd v(with_delay ? 7 : 6);
  const cd a = with_delay ? p.a * std::polar(1.0, -kTwoPi * f_ref_ghz * p.delay_ns) : p.a;
  v << a.real(), a.imag(), p.ql, p.qc, std::tan(p.theta), p.f_r_ghz;
  if (with_delay) v(6) = p.delay_ns;
  return v;
}

ReflectionParams unpack_reflection(const Eigen::VectorXd& v, bool with_delay, double f_ref_ghz) {
  ReflectionParams p;
  p.a = cd(v(0), v(1));
  p.ql = v(2);
  p.qc = v(3);
  p.theta = std::atan(v(4));
  p.f_r_ghz = v(5);
  p.delay_ns = with_delay ? v(6) : 0.0;
  if (with_delay) p.a *= std::polar(1.0, kTwoPi * f_ref_ghz * p.delay_ns);
  return p;
}

LeastSquaresProblem reflection_problem(const ComplexTrace& trace, bool with_delay) {
  const auto n = static_cast<Eigen::Index>(trace.values.size());
  LeastSquaresProblem prob;
  prob.n_residuals = 2 * n;
  prob.names = {"a_re", "a_im", "ql", "qc", "tan_theta", "f_r_ghz"};
  if (with_delay) prob.names.push_back("delay_ns");
  const double f_ref = delay_reference_ghz(trace);
  prob.residuals = [&trace, n, with_delay, f_ref](const Eigen::VectorXd& v, Eigen::VectorXd& r) {
    r.resize(2 * n);
    const auto p = unpack_reflection(v, with_delay, f_ref);
    for (Eigen::Index i = 0; i < n; ++i) {
      const cd d = reflection_model(p, trace.freqs_ghz[i]) - trace.values[i];
      r(i) = d.real();
      r(n + i) = d.imag();
    }
  };
  prob.jacobian = [&trace, n, with_delay, f_ref](const Eigen::VectorXd& v, Eigen::MatrixXd& j) {
    j.resize(2 * n, v.size());
    const auto p = unpack_reflection(v, with_delay, f_ref);
    cd row[7];
    for (Eigen::Index i = 0; i < n; ++i) {
      jacobian_rows(p, trace.freqs_ghz[i], with_delay, f_ref, row);
      for (Eigen::Index k = 0; k < j.cols(); ++k) {
        j(i, k) = row[k].real();
        j(n + i, k) = row[k].imag();
      }
    }
  };
  return prob;
}

InitialGuess initial_guess_reflection(const ComplexTrace& trace, bool with_delay) {
  validate(trace);
  if (trace.values.size() < 10) throw InputError("too few samples for an initial guess");
  const double tau = with_delay ? estimate_delay(trace) : 0.0;
  const auto z = remove_delay(trace, tau);
  const auto& f = trace.freqs_ghz;
  const double noise = detail::complex_noise_rms(z);

  InitialGuess out;
  const Circle circle = kasa_fit(z);
  const cd edge = edge_mean(z);
  double spread = 0.0;
  for (const cd& v : z) spread = std::max(spread, std::abs(v - edge));
  if (!circle.ok || circle.radius < noise || spread <= 3.0 * noise || circle.radius > 1e3 * std::abs(edge_mean(z))) {
    out.params = dip_heuristic(f, z);
    out.params.delay_ns = tau;
    out.fallback = true;
    return out;
  }

  // Off-resonant point projected onto the circle.
  cd dir = edge - circle.center;
  dir = std::abs(dir) > 0.0 ? dir / std::abs(dir) : cd(1.0, 0.0);
  const cd a0 = circle.center + circle.radius * dir;
  const auto shape = dip_shape(f, z, a0);
  const double fr0 = f[shape.center];
  const double ql0 = fr0 / std::max(shape.f_hi - shape.f_lo, 1e-12);

  // Angle about the centre: psi(f) = psi0 - 2 atan(2 Ql (f - f_r)/f_r).
  std::vector<double> angle(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) angle[i] = std::arg(z[i] - circle.center);
  angle = detail::unwrap(angle);
  const auto n = static_cast<Eigen::Index>(z.size());
  LeastSquaresProblem phase;
  phase.n_residuals = n;
  phase.residuals = [&](const Eigen::VectorXd& v, Eigen::VectorXd& r) {
    for (Eigen::Index i = 0; i < n; ++i) {
      r(i) = v(0) - 2.0 * std::atan(2.0 * v(1) * (f[i] - v(2)) / v(2)) - angle[i];
    }
  };
  Eigen::Vector3d p0(angle[shape.center], ql0, fr0);
  Eigen::Vector3d ph = p0;
  try {
    const auto fit = lm_minimize(phase, p0);
    if (fit.params.allFinite() && fit.params(1) > 0.0 && fit.params(2) > f.front() &&
        fit.params(2) < f.back()) {
      ph = fit.params;
    }
  } catch (const Error&) {
    // keep the shape-based estimate
  }

  ReflectionParams p;
  p.f_r_ghz = ph(2);
  p.ql = ph(1);
  p.a = circle.center + std::polar(circle.radius, ph(0) + std::numbers::pi);
  const double diameter_ratio = 2.0 * circle.radius / std::abs(p.a);
  double theta = std::remainder(ph(0) - std::numbers::pi - std::arg(p.a), kTwoPi);
  p.theta = std::clamp(theta, -kThetaLimit, kThetaLimit);
  p.qc = 2.0 * p.ql / (diameter_ratio * std::cos(p.theta));
  p.delay_ns = tau;
  out.params = p;
  return out;
}

std::vector<cd> reflection_residuals(const ComplexTrace& trace, const ReflectionParams& p) {
  std::vector<cd> r(trace.values.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = trace.values[i] - reflection_model(p, trace.freqs_ghz[i]);
  }
  return r;
}

ResonatorFit fit_reflection(const ComplexTrace& trace, const std::optional<ReflectionParams>& init,
                            const ReflectionFitOptions& options) {
  validate(trace);
  if (trace.values.size() < 50) {
    throw InputError("reflection fit needs at least 50 samples, got " +
                     std::to_string(trace.values.size()));
  }
  const bool with_delay = options.fit_delay;

  ResonatorFit out;
  const double tau0 = with_delay ? estimate_delay(trace) : 0.0;
  const auto z = remove_delay(trace, tau0);
  out.noise_rms = detail::complex_noise_rms(z);

  // Resonance visibility: deviation of the smoothed trace from the edge level.
  {
    const cd edge = edge_mean(z);
    const auto smooth = detail::moving_average(z, 2);
    double depth = 0.0;
    for (const auto& s : smooth) depth = std::max(depth, std::abs(s - edge));
    if (depth < 3.0 * out.noise_rms || depth < 1e-6 * std::abs(edge)) {
      throw NoFitError("no resonance found: dip depth " + std::to_string(depth) +
                       " below 3x noise floor " + std::to_string(out.noise_rms));
    }
  }

  ReflectionParams start;
  if (init) {
    start = *init;
  } else {
    const auto guess = initial_guess_reflection(trace, with_delay);
    start = guess.params;
    out.fallback_init = guess.fallback;
  }
  if (!(start.ql > 0.0) || !(start.qc > 0.0) || !(start.f_r_ghz > 0.0) ||
      !(std::abs(start.theta) < 0.5 * std::numbers::pi)) {
    throw InputError("initial reflection parameters out of range");
  }

  const auto problem = reflection_problem(trace, with_delay);
  const double f_ref = delay_reference_ghz(trace);
  out.fit = lm_minimize(problem, pack_reflection(start, with_delay, f_ref), options.lm);
  out.params = unpack_reflection(out.fit.params, with_delay, f_ref);

  if (out.params.ql < 0.0 && out.params.qc < 0.0) {
    // (Ql, Qc) -> (-Ql, -Qc) leaves the model unchanged up to the sign of x.
    out.warnings.push_back("fit converged to negative quality factors");
  }

  const Eigen::MatrixXd& cov = out.fit.covariance;
  const Eigen::VectorXd& e = out.fit.errors;
  const double u = out.fit.params(4);
  out.errors.a_re = e(0);
  out.errors.a_im = e(1);
  if (with_delay) {
    // A = A_ref exp(i 2 pi f_ref tau): propagate through the rotation.
    const double phi = kTwoPi * f_ref * out.params.delay_ns;
    const double c = std::cos(phi), s = std::sin(phi);
    Eigen::Matrix<double, 2, 3> m;
    m << c, -s, -kTwoPi * f_ref * out.params.a.imag(),
         s, c, kTwoPi * f_ref * out.params.a.real();
    Eigen::Matrix3d sub;
    const int idx[3] = {0, 1, 6};
    for (int r = 0; r < 3; ++r)
      for (int q = 0; q < 3; ++q) sub(r, q) = cov(idx[r], idx[q]);
    const Eigen::Matrix2d ca = m * sub * m.transpose();
    out.errors.a_re = std::sqrt(std::max(ca(0, 0), 0.0));
    out.errors.a_im = std::sqrt(std::max(ca(1, 1), 0.0));
  }
  out.errors.ql = e(2);
  out.errors.qc = e(3);
  out.errors.theta = e(4) / (1.0 + u * u);
  out.errors.f_r_ghz = e(5);
  out.errors.delay_ns = with_delay ? e(6) : 0.0;

  const double ql = out.params.ql, qc = out.params.qc;
  if (ql > 0.0 && ql < qc) {
    out.qi = derive_qi(ql, qc);
    const double dql = out.qi * out.qi / (ql * ql);
    const double dqc = -out.qi * out.qi / (qc * qc);
    const double var = dql * dql * cov(2, 2) + dqc * dqc * cov(3, 3) + 2.0 * dql * dqc * cov(2, 3);
    out.errors.qi = std::sqrt(std::max(var, 0.0));
  } else {
    out.qi = std::numeric_limits<double>::quiet_NaN();
    out.errors.qi = std::numeric_limits<double>::quiet_NaN();
    out.warnings.push_back("nonphysical Qi: fitted Qc <= Ql");
  }

  const double span = trace.freqs_ghz.back() - trace.freqs_ghz.front();
  if (ql > 0.0 && span < 3.0 * out.params.f_r_ghz / ql) {
    out.warnings.push_back("trace spans fewer than 3 linewidths");
  }
  out.residual_rms =
      std::sqrt(out.fit.chi2 / static_cast<double>(trace.values.size()));
  return out;
}

nlohmann::json to_json(const ResonatorFit& fit) {
  const auto& p = fit.params;
  nlohmann::json params = {{"a_re", p.a.real()}, {"a_im", p.a.imag()}, {"ql", p.ql},
                           {"qc", p.qc},         {"qi", fit.qi},        {"theta", p.theta},
                           {"f_r_ghz", p.f_r_ghz}};
  nlohmann::json errors = {{"a_re", fit.errors.a_re}, {"a_im", fit.errors.a_im},
                           {"ql", fit.errors.ql},     {"qc", fit.errors.qc},
                           {"qi", fit.errors.qi},     {"theta", fit.errors.theta},
                           {"f_r_ghz", fit.errors.f_r_ghz}};
  if (fit.fit.params.size() == 7) {
    params["delay_ns"] = p.delay_ns;
    errors["delay_ns"] = fit.errors.delay_ns;
  }
  // JSON has no NaN; nonphysical Qi becomes null.
  for (auto* obj : {&params, &errors}) {
    for (auto it = obj->begin(); it != obj->end(); ++it) {
      if (it->is_number_float() && !std::isfinite(it->get<double>())) *it = nullptr;
    }
  }
  return {{"kind", "reflection"},
          {"params", params},
          {"errors", errors},
          {"chi2", fit.fit.chi2},
          {"residual_rms", fit.residual_rms},
          {"iterations", fit.fit.iterations},
          {"converged", fit.fit.converged},
          {"message", fit.fit.message},
          {"warnings", fit.warnings}};
}

}  // namespace cqed
