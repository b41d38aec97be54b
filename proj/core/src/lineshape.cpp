#include "cqed/lineshape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cqed/error.hpp"
#include "stats.hpp"

namespace cqed {

double lorentzian_dip(const LorentzianParams& p, double f) {
  const double q = 2.0 * (f - p.f0_ghz) / p.fwhm_ghz;
  return p.offset - p.depth / (1.0 + q * q);
}

double db_to_linear(double db) { return std::pow(10.0, db / 20.0); }
double linear_to_db(double mag) { return 20.0 * std::log10(mag); }

LeastSquaresProblem lorentzian_problem(const Samples& s) {
  const auto n = static_cast<Eigen::Index>(s.x.size());
  LeastSquaresProblem prob;
  prob.n_residuals = n;
  prob.names = {"f0_ghz", "fwhm_ghz", "depth", "offset"};
  auto unpack = [](const Eigen::VectorXd& v) { return LorentzianParams{v(0), v(1), v(2), v(3)}; };
  prob.residuals = [&s, n, unpack](const Eigen::VectorXd& v, Eigen::VectorXd& r) {
    r.resize(n);
    const auto p = unpack(v);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = lorentzian_dip(p, s.x[i]) - s.y[i];
  };
  prob.jacobian = [&s, n](const Eigen::VectorXd& v, Eigen::MatrixXd& j) {
    j.resize(n, v.size());
    const double f0 = v(0), w = v(1), d = v(2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double q = 2.0 * (s.x[i] - f0) / w;
      const double l = 1.0 / (1.0 + q * q);
      j(i, 0) = -4.0 * d * q * l * l / w;
      j(i, 1) = -2.0 * d * q * q * l * l / w;
      j(i, 2) = -l;
      j(i, 3) = 1.0;
    }
  };
  return prob;
}

LorentzianFit fit_lorentzian(const Samples& s, const LmOptions& lm) {
  validate(s, "lineshape");
  if (s.x.size() < 20) {
    throw InputError("Lorentzian fit needs at least 20 points, got " + std::to_string(s.x.size()));
  }
  LorentzianFit out;
  out.noise_sigma = detail::noise_sigma(s.y);

  const std::size_t n = s.x.size();
  const std::size_t k = std::max<std::size_t>(2, n / 10);
  std::vector<double> edges;
  for (std::size_t i = 0; i < k; ++i) {
    edges.push_back(s.y[i]);
    edges.push_back(s.y[n - 1 - i]);
  }
  const double offset0 = detail::median(edges);
  const auto smooth = detail::moving_average(s.y, 1);
  const auto min_it = std::min_element(smooth.begin(), smooth.end());
  const std::size_t c = static_cast<std::size_t>(min_it - smooth.begin());
  const double depth0 = offset0 - *min_it;
  if (!(depth0 > 3.0 * out.noise_sigma) || !(depth0 > 1e-12 * std::max(1.0, std::abs(offset0)))) {
    throw NoFitError("no dip detected: depth " + std::to_string(depth0) + " vs noise " +
                     std::to_string(out.noise_sigma));
  }

  const double half = offset0 - 0.5 * depth0;
  auto crossing = [&](std::size_t i, std::size_t j) {
    // linear interpolation between i (below half) and j (above half)
    const double t = (half - smooth[i]) / (smooth[j] - smooth[i]);
    return s.x[i] + t * (s.x[j] - s.x[i]);
  };
  std::size_t lo = c, hi = c;
  while (lo > 0 && smooth[lo - 1] < half) --lo;
  while (hi + 1 < n && smooth[hi + 1] < half) ++hi;
  const double f_lo = lo > 0 ? crossing(lo, lo - 1) : s.x.front();
  const double f_hi = hi + 1 < n ? crossing(hi, hi + 1) : s.x.back();
  const double step = (s.x.back() - s.x.front()) / static_cast<double>(n - 1);
  const double fwhm0 = std::max(f_hi - f_lo, 2.0 * step);

  Eigen::Vector4d init(s.x[c], fwhm0, depth0, offset0);
  const auto prob = lorentzian_problem(s);
  out.fit = lm_minimize(prob, init, lm);
  const auto& v = out.fit.params;
  out.params = {v(0), std::abs(v(1)), v(2), v(3)};
  const auto& e = out.fit.errors;
  out.errors = {e(0), e(1), e(2), e(3)};
  if (!(out.params.depth > 0.0)) {
    throw NoFitError("Lorentzian fit converged to a non-positive dip depth");
  }
  if (s.x.back() - s.x.front() < 2.0 * out.params.fwhm_ghz) {
    out.warnings.push_back("spectrum spans fewer than 2 FWHM");
  }
  return out;
}

LeastSquaresProblem lorentzian_pair_problem(const Samples& s) {
  const auto n = static_cast<Eigen::Index>(s.x.size());
  LeastSquaresProblem prob;
  prob.n_residuals = n;
  prob.names = {"f1_ghz", "fwhm1_ghz", "depth1", "f2_ghz", "fwhm2_ghz", "depth2", "offset"};
  prob.residuals = [&s, n](const Eigen::VectorXd& v, Eigen::VectorXd& r) {
    r.resize(n);
    const LorentzianParams a{v(0), v(1), v(2), v(6)};
    const LorentzianParams b{v(3), v(4), v(5), 0.0};
    for (Eigen::Index i = 0; i < n; ++i) {
      r(i) = lorentzian_dip(a, s.x[i]) + lorentzian_dip(b, s.x[i]) - s.y[i];
    }
  };
  prob.jacobian = [&s, n](const Eigen::VectorXd& v, Eigen::MatrixXd& j) {
    j.resize(n, v.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = 0; k < 2; ++k) {
        const double f0 = v(3 * k), w = v(3 * k + 1), d = v(3 * k + 2);
        const double q = 2.0 * (s.x[i] - f0) / w;
        const double l = 1.0 / (1.0 + q * q);
        j(i, 3 * k) = -4.0 * d * q * l * l / w;
        j(i, 3 * k + 1) = -2.0 * d * q * q * l * l / w;
        j(i, 3 * k + 2) = -l;
      }
      j(i, 6) = 1.0;
    }
  };
  return prob;
}

LorentzianPairFit fit_lorentzian_pair(const Samples& s, const LmOptions& lm) {
  // Seed the stronger dip with the single-dip fit, the weaker one from the
  // deepest point of what that fit leaves behind.
  const LorentzianFit first = fit_lorentzian(s, lm);
  std::vector<double> rest(s.y.size());
  for (std::size_t i = 0; i < rest.size(); ++i) {
    rest[i] = s.y[i] - lorentzian_dip(first.params, s.x[i]) + first.params.offset;
  }
  const auto smooth = detail::moving_average(rest, 1);
  const double base = detail::median(rest);
  const auto min_it = std::min_element(smooth.begin(), smooth.end());
  const double depth2 = base - *min_it;
  if (!(depth2 > 3.0 * first.noise_sigma) || !(depth2 > 0.0)) {
    throw NoFitError("no second dip detected: depth " + std::to_string(depth2) + " vs noise " +
                     std::to_string(first.noise_sigma));
  }
  Eigen::VectorXd init(7);
  init << first.params.f0_ghz, first.params.fwhm_ghz, first.params.depth,
      s.x[static_cast<std::size_t>(min_it - smooth.begin())], first.params.fwhm_ghz, depth2,
      first.params.offset;

  LorentzianPairFit out;
  out.fit = lm_minimize(lorentzian_pair_problem(s), init, lm);
  const auto& v = out.fit.params;
  const auto& e = out.fit.errors;
  LorentzianParams a{v(0), std::abs(v(1)), v(2), v(6)}, b{v(3), std::abs(v(4)), v(5), v(6)};
  LorentzianParams ea{e(0), e(1), e(2), e(6)}, eb{e(3), e(4), e(5), e(6)};
  if (!(a.depth > 0.0) || !(b.depth > 0.0)) {
    throw NoFitError("two-dip fit converged to a non-positive depth");
  }
  if (b.f0_ghz < a.f0_ghz) {
    std::swap(a, b);
    std::swap(ea, eb);
  }
  out.low = a;
  out.high = b;
  out.low_errors = ea;
  out.high_errors = eb;
  return out;
}

nlohmann::json to_json(const LorentzianFit& fit) {
  const auto& p = fit.params;
  const auto& e = fit.errors;
  return {{"kind", "lorentzian"},
          {"params",
           {{"f0_ghz", p.f0_ghz}, {"fwhm_mhz", p.fwhm_ghz * 1e3}, {"depth", p.depth},
            {"offset", p.offset}}},
          {"errors",
           {{"f0_ghz", e.f0_ghz}, {"fwhm_mhz", e.fwhm_ghz * 1e3}, {"depth", e.depth},
            {"offset", e.offset}}},
          {"chi2", fit.fit.chi2},
          {"iterations", fit.fit.iterations},
          {"converged", fit.fit.converged},
          {"message", fit.fit.message},
          {"warnings", fit.warnings}};
}

nlohmann::json to_json(const LorentzianPairFit& fit) {
  auto dip = [](const LorentzianParams& p, const LorentzianParams& e) {
    return nlohmann::json{{"f0_ghz", p.f0_ghz},     {"fwhm_mhz", p.fwhm_ghz * 1e3},
                          {"depth", p.depth},       {"f0_err_ghz", e.f0_ghz},
                          {"fwhm_err_mhz", e.fwhm_ghz * 1e3}, {"depth_err", e.depth}};
  };
  return {{"kind", "lorentzian_pair"},
          {"low", dip(fit.low, fit.low_errors)},
          {"high", dip(fit.high, fit.high_errors)},
          {"offset", fit.low.offset},
          {"separation_mhz", fit.separation_mhz()},
          {"chi2", fit.fit.chi2},
          {"iterations", fit.fit.iterations},
          {"converged", fit.fit.converged},
          {"message", fit.fit.message},
          {"warnings", fit.warnings}};
}

}  // namespace cqed
