#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace cqed {

using ResidualFn = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)>;
using JacobianFn = std::function<void(const Eigen::VectorXd& params, Eigen::MatrixXd& jacobian)>;

struct LeastSquaresProblem {
  Eigen::Index n_residuals = 0;
  ResidualFn residuals;
  JacobianFn jacobian;  // optional; central differences when empty
  std::vector<std::string> names;
};

struct LmOptions {
  int max_iterations = 200;
  double xtol = 1e-10;  // relative (scaled) step
  double ftol = 1e-10;  // relative cost decrease
  double gtol = 1e-10;  // cosine between residual and any Jacobian column
  double initial_damping = 1e-3;
  double max_damping = 1e16;
};

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd params;
  Eigen::VectorXd errors;
  Eigen::MatrixXd covariance;
  int iterations = 0;
  bool converged = false;
  double chi2 = 0.0;  // sum of squared residuals
  Eigen::Index n_residuals = 0;
  std::string message;

  double value(std::string_view name) const;
  double error(std::string_view name) const;
  Eigen::Index index(std::string_view name) const;
  double reduced_chi2() const;
};

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& params,
                                 Eigen::Index n_residuals);

// Levenberg-Marquardt with Jacobi column scaling; each damped step is solved
// by QR of the augmented system [J D^-1; sqrt(lambda) I].
FitResult lm_minimize(const LeastSquaresProblem& problem, const Eigen::VectorXd& init,
                      const LmOptions& options = {});

// Covariance sigma^2 (J^T J)^+ at params, sigma^2 = chi2 / (m - n).
Eigen::MatrixXd covariance_at(const LeastSquaresProblem& problem, const Eigen::VectorXd& params,
                              double chi2);

nlohmann::json to_json(const FitResult& fit);

}  // namespace cqed
