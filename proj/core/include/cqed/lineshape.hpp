#pragma once

#include <nlohmann/json.hpp>

#include "cqed/error.hpp"
#include "cqed/lm.hpp"
#include "cqed/trace.hpp"

namespace cqed {

// y(f) = offset - depth / (1 + (2 (f - f0) / fwhm)^2), f in GHz.
struct LorentzianParams {
  double f0_ghz = 0.0;
  double fwhm_ghz = 0.0;
  double depth = 0.0;
  double offset = 0.0;
};

double lorentzian_dip(const LorentzianParams& p, double f_ghz);

struct LorentzianFit {
  LorentzianParams params;
  LorentzianParams errors;
  double noise_sigma = 0.0;
  FitResult fit;
  Warnings warnings;

  double fwhm_mhz() const { return params.fwhm_ghz * 1e3; }
};

// Initialised from the deepest point of the smoothed data, so with several
// comparable dips the fit settles on the deepest one.
LorentzianFit fit_lorentzian(const Samples& spectrum, const LmOptions& lm = {});

LeastSquaresProblem lorentzian_problem(const Samples& spectrum);

// Two dips on a shared offset, fitted jointly so overlapping tails do not
// pull the centres. Dips are returned in ascending frequency.
struct LorentzianPairFit {
  LorentzianParams low;   // offset field shared by both
  LorentzianParams high;
  LorentzianParams low_errors;
  LorentzianParams high_errors;
  FitResult fit;
  Warnings warnings;

  double separation_mhz() const { return (high.f0_ghz - low.f0_ghz) * 1e3; }
};

LorentzianPairFit fit_lorentzian_pair(const Samples& spectrum, const LmOptions& lm = {});

LeastSquaresProblem lorentzian_pair_problem(const Samples& spectrum);

// Magnitude in dB (20 log10) to linear amplitude and back.
double db_to_linear(double db);
double linear_to_db(double mag);

nlohmann::json to_json(const LorentzianFit& fit);
nlohmann::json to_json(const LorentzianPairFit& fit);

}  // namespace cqed
