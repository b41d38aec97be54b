#pragma once

#include <complex>
#include <optional>

#include <nlohmann/json.hpp>

#include "cqed/error.hpp"
#include "cqed/lm.hpp"
#include "cqed/trace.hpp"

namespace cqed {

// S(f) = A e^{-i 2 pi f tau} [1 - 2 Ql/(Qc cos(theta)) e^{i theta} / (1 + 2i Ql (f - f_r)/f_r)]
// with Qc > 0, theta in (-pi/2, pi/2), f in GHz and tau in ns.
struct ReflectionParams {
  std::complex<double> a{1.0, 0.0};
  double ql = 0.0;
  double qc = 0.0;
  double theta = 0.0;
  double f_r_ghz = 0.0;
  double delay_ns = 0.0;
};

std::complex<double> reflection_model(const ReflectionParams& p, double f_ghz);

// 1/Qi = 1/Ql - 1/Qc. Throws InputError unless 0 < Ql < Qc.
double derive_qi(double ql, double qc);
double loaded_q(double qi, double qc);

struct InitialGuess {
  ReflectionParams params;
  bool fallback = false;  // circle fit degenerate; |S| dip heuristics used
};

InitialGuess initial_guess_reflection(const ComplexTrace& trace, bool with_delay = false);

struct ReflectionFitOptions {
  bool fit_delay = false;
  LmOptions lm{};
};

struct ResonatorErrors {
  double a_re = 0.0, a_im = 0.0, ql = 0.0, qc = 0.0, qi = 0.0, theta = 0.0, f_r_ghz = 0.0,
         delay_ns = 0.0;
};

struct ResonatorFit {
  ReflectionParams params;
  double qi = 0.0;  // NaN when the fit lands on Qc <= Ql
  ResonatorErrors errors;
  double residual_rms = 0.0;
  double noise_rms = 0.0;  // estimated from the data before fitting
  bool fallback_init = false;
  FitResult fit;
  Warnings warnings;

  bool converged() const { return fit.converged; }
};

// Joint fit of real and imaginary parts. Throws NoFitError when the resonance
// is not resolved above the noise.
ResonatorFit fit_reflection(const ComplexTrace& trace,
                            const std::optional<ReflectionParams>& init = std::nullopt,
                            const ReflectionFitOptions& options = {});

// Residuals S_data - S_model, per sample.
std::vector<std::complex<double>> reflection_residuals(const ComplexTrace& trace,
                                                       const ReflectionParams& p);

nlohmann::json to_json(const ResonatorFit& fit);

// Parameter vector order used by the fitter: Re A, Im A, Ql, Qc, tan(theta),
// f_r, [delay]. With a delay, A is packed as its value at f_ref (the trace
// centre, see delay_reference_ghz) to decorrelate it from the delay.
// Exposed for Jacobian checks.
double delay_reference_ghz(const ComplexTrace& trace);
Eigen::VectorXd pack_reflection(const ReflectionParams& p, bool with_delay, double f_ref_ghz = 0.0);
ReflectionParams unpack_reflection(const Eigen::VectorXd& v, bool with_delay,
                                   double f_ref_ghz = 0.0);
LeastSquaresProblem reflection_problem(const ComplexTrace& trace, bool with_delay);

}  // namespace cqed
