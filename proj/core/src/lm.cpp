#include "cqed/lm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cqed/error.hpp"

namespace cqed {
namespace {

Eigen::MatrixXd jacobian_at(const LeastSquaresProblem& problem, const Eigen::VectorXd& p) {
  if (problem.jacobian) {
    Eigen::MatrixXd j(problem.n_residuals, p.size());
    problem.jacobian(p, j);
    return j;
  }
  return numeric_jacobian(problem.residuals, p, problem.n_residuals);
}

Eigen::VectorXd column_scales(const Eigen::MatrixXd& j) {
  Eigen::VectorXd d = j.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    if (!(d(k) > 0.0) || !std::isfinite(d(k))) d(k) = 1.0;
  }
  return d;
}

}  // namespace

Eigen::Index FitResult::index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<Eigen::Index>(i);
  }
  throw InputError("no fit parameter named '" + std::string(name) + "'");
}

double FitResult::value(std::string_view name) const { return params(index(name)); }
double FitResult::error(std::string_view name) const { return errors(index(name)); }

double FitResult::reduced_chi2() const {
  const auto dof = n_residuals - params.size();
  return dof > 0 ? chi2 / static_cast<double>(dof) : 0.0;
}

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& params,
                                 Eigen::Index n_residuals) {
  const double step_rel = std::cbrt(std::numeric_limits<double>::epsilon());
  Eigen::MatrixXd j(n_residuals, params.size());
  Eigen::VectorXd plus(n_residuals), minus(n_residuals);
  Eigen::VectorXd p = params;
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    const double h = step_rel * std::max(std::abs(params(k)), 1e-8);
    p(k) = params(k) + h;
    f(p, plus);
    p(k) = params(k) - h;
    f(p, minus);
    p(k) = params(k);
    j.col(k) = (plus - minus) / (2.0 * h);
  }
  return j;
}

Eigen::MatrixXd covariance_at(const LeastSquaresProblem& problem, const Eigen::VectorXd& params,
                              double chi2) {
  const Eigen::MatrixXd j = jacobian_at(problem, params);
  const Eigen::VectorXd d = column_scales(j);
  const Eigen::MatrixXd js = j * d.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(js.transpose() * js);
  const Eigen::VectorXd& w = eig.eigenvalues();
  const double cutoff = std::numeric_limits<double>::epsilon() * w.size() * w.maxCoeff();
  Eigen::VectorXd inv_w(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) inv_w(k) = w(k) > cutoff ? 1.0 / w(k) : 0.0;
  const Eigen::MatrixXd pinv = eig.eigenvectors() * inv_w.asDiagonal() *
                               eig.eigenvectors().transpose();
  const auto dof = problem.n_residuals - params.size();
  const double sigma2 = dof > 0 ? chi2 / static_cast<double>(dof) : 0.0;
  Eigen::MatrixXd cov = sigma2 * d.cwiseInverse().asDiagonal() * pinv * d.cwiseInverse().asDiagonal();
  return 0.5 * (cov + cov.transpose());
}

FitResult lm_minimize(const LeastSquaresProblem& problem, const Eigen::VectorXd& init,
                      const LmOptions& opt) {
  const Eigen::Index n = init.size();
  const Eigen::Index m = problem.n_residuals;
  if (!problem.residuals || n == 0 || m < n) {
    throw InputError("least-squares problem needs a residual function and m >= n");
  }
  if (!init.allFinite()) throw InputError("initial parameters must be finite");

  Eigen::VectorXd p = init;
  Eigen::VectorXd r(m);
  problem.residuals(p, r);
  if (!r.allFinite()) throw InputError("residuals are not finite at the initial parameters");
  double cost = r.squaredNorm();

  FitResult out;
  out.names = problem.names;
  if (out.names.size() != static_cast<std::size_t>(n)) {
    out.names.clear();
    for (Eigen::Index k = 0; k < n; ++k) out.names.push_back("p" + std::to_string(k));
  }
  out.n_residuals = m;

  double lambda = opt.initial_damping;
  Eigen::MatrixXd aug(m + n, n);
  Eigen::VectorXd rhs(m + n);
  Eigen::VectorXd r_new(m);
  bool done = false;
  int iter = 0;

  for (; iter < opt.max_iterations && !done; ++iter) {
    if (cost == 0.0) {
      out.converged = true;
      out.message = "zero residual";
      break;
    }
    const Eigen::MatrixXd j = jacobian_at(problem, p);
    if (!j.allFinite()) {
      out.message = "non-finite Jacobian";
      break;
    }
    const Eigen::VectorXd d = column_scales(j);
    const Eigen::MatrixXd js = j * d.cwiseInverse().asDiagonal();
    const Eigen::VectorXd grad = js.transpose() * r;
    if (grad.cwiseAbs().maxCoeff() <= opt.gtol * std::sqrt(cost)) {
      out.converged = true;
      out.message = "gradient orthogonal to residuals";
      break;
    }

    while (true) {
      aug.topRows(m) = js;
      aug.bottomRows(n) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(n, n);
      rhs.head(m) = -r;
      rhs.tail(n).setZero();
      const Eigen::VectorXd step_scaled = aug.colPivHouseholderQr().solve(rhs);
      const Eigen::VectorXd step = d.cwiseInverse().cwiseProduct(step_scaled);
      Eigen::VectorXd trial = p + step;
      bool improved = false;
      double cost_new = std::numeric_limits<double>::infinity();
      if (step.allFinite()) {
        problem.residuals(trial, r_new);
        if (r_new.allFinite()) {
          cost_new = r_new.squaredNorm();
          improved = cost_new < cost;
        }
      }
      const double rel_step = step_scaled.norm() / (d.cwiseProduct(p).norm() + opt.xtol);
      if (improved) {
        const double rel_cost = (cost - cost_new) / cost;
        p = trial;
        r = r_new;
        cost = cost_new;
        lambda = std::max(lambda * 0.1, 1e-15);
        if (rel_step < opt.xtol && rel_cost < opt.ftol) {
          out.converged = true;
          out.message = "relative step and cost decrease below tolerance";
          done = true;
        }
        break;
      }
      if (step.allFinite() && rel_step < opt.xtol) {
        // No decrease even from a negligible step: at round-off level.
        out.converged = true;
        out.message = "relative step below tolerance with no further cost decrease";
        done = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > opt.max_damping) {
        out.message = "damping escalation failed to reduce the cost";
        done = true;
        break;
      }
    }
  }
  if (!out.converged && out.message.empty()) out.message = "iteration limit reached";

  out.iterations = iter;
  out.params = p;
  out.chi2 = cost;
  out.covariance = covariance_at(problem, p, cost);
  out.errors = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

nlohmann::json to_json(const FitResult& fit) {
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json errors = nlohmann::json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    params[fit.names[i]] = fit.params(static_cast<Eigen::Index>(i));
    errors[fit.names[i]] = fit.errors(static_cast<Eigen::Index>(i));
  }
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
    std::vector<double> row(fit.covariance.cols());
    for (Eigen::Index c = 0; c < fit.covariance.cols(); ++c) row[c] = fit.covariance(r, c);
    cov.push_back(row);
  }
  return {{"params", params},         {"errors", errors},
          {"covariance", cov},        {"chi2", fit.chi2},
          {"iterations", fit.iterations}, {"converged", fit.converged},
          {"message", fit.message}};
}

}  // namespace cqed
