#pragma once

#include <nlohmann/json.hpp>

#include "cqed/error.hpp"
#include "cqed/lm.hpp"
#include "cqed/trace.hpp"

namespace cqed {

// y(t) = A exp(-t/T_R) cos(omega t + B) + a t + b, with t in ns and omega in
// rad/ns.
struct RabiParams {
  double amplitude = 0.0;
  double t_r_ns = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double slope = 0.0;
  double offset = 0.0;
};

double rabi_model(const RabiParams& p, double t_ns);

struct RabiFit {
  RabiParams params;
  RabiParams errors;
  double omega_init = 0.0;  // frequency of the periodogram peak
  double bin_width = 0.0;   // 2 pi / record length
  FitResult fit;
  Warnings warnings;
};

// Peak of the detrended periodogram (zero padded) as the omega seed.
struct SpectralPeak {
  double omega = 0.0;
  double power = 0.0;
  double median_power = 0.0;
  double phase = 0.0;
  double amplitude = 0.0;
};

SpectralPeak periodogram_peak(const Samples& detrended, int oversample = 8);

RabiFit fit_rabi(const Samples& timeseries, const LmOptions& lm = {});

LeastSquaresProblem rabi_problem(const Samples& timeseries);

nlohmann::json to_json(const RabiFit& fit);

}  // namespace cqed
