#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqed/coupling.hpp"
#include "cqed/lineshape.hpp"
#include "cqed/rabi.hpp"
#include "cqed/resonator.hpp"
#include "cqed/trace.hpp"

namespace cqed {

// Noise is additive white Gaussian drawn from Rng(seed, stream). SNR is in dB
// relative to the natural amplitude of each dataset:
//   reflection traces and maps: complex RMS = |A| 10^(-SNR/20), split evenly
//     between the two quadratures;
//   lineshapes and two-tone maps: sigma = depth 10^(-SNR/20);
//   Rabi traces: sigma = A 10^(-SNR/20).
// An infinite SNR gives the noiseless model exactly.
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

double noise_scale(double amplitude, double snr_db);

struct Axis {
  double start = 0.0;
  double stop = 0.0;
  int points = 0;

  std::vector<double> values() const;
};

void validate(const Axis& a, const char* what);

struct ReflectionSynthSpec {
  ReflectionParams truth{};
  Axis freq_ghz{};
  double snr_db = kNoiseless;
  std::uint64_t seed = 0;
};

// Window of +-half_span_linewidths around f_r.
Axis reflection_window(const ReflectionParams& truth, double half_span_linewidths, int points);

struct PowerMapSpec {
  DispersiveSystem system{};
  double qc = 0.0;
  double qi_intrinsic = 0.0;
  std::vector<double> powers_dbm;
  Axis freq_ghz{};
  PowerModel power_model{};
  double snr_db = kNoiseless;
  std::uint64_t seed = 0;
};

struct GateMapSpec {
  double f_bare_ghz = 0.0;
  double g_mhz = 0.0;
  double qc = 0.0;
  double qi = 0.0;
  double gamma_q_mhz = 0.0;
  Axis freq_ghz{};
  double snr_db = kNoiseless;
  std::uint64_t seed = 0;
};

struct TwoToneSpec {
  double alpha_mhz = 0.0;
  double fwhm_mhz = 0.0;
  double depth = 1.0;
  double baseline = 0.0;
  bool two_photon = false;
  double two_photon_depth_ratio = 0.5;
  double background_amplitude = 0.0;  // smooth drive-frequency background
  double background_period_ghz = 0.5;
  Axis drive_ghz{};
  double snr_db = kNoiseless;
  std::uint64_t seed = 0;
};

struct LineshapeSynthSpec {
  LorentzianParams truth{};
  Axis freq_ghz{};
  double snr_db = kNoiseless;
  std::uint64_t seed = 0;
};

struct RabiSynthSpec {
  RabiParams truth{};
  Axis t_ns{};
  double snr_db = kNoiseless;
  std::uint64_t seed = 0;
};

ComplexTrace synth_reflection(const ReflectionSynthSpec& spec);

// |S| over (power, frequency); rows follow power.
Grid2D synth_power_map(const PowerMapSpec& spec);

// |S| over (V_G, frequency); anti-crossing rows carry both hybrid branches.
Grid2D synth_gate_map(const GateMapSpec& spec, const SweepResult& sweep);

// Drive response over (V_G, f_d) with dips at f01 and optionally f01 + alpha/2.
Grid2D synth_two_tone(const TwoToneSpec& spec, const SweepResult& sweep);

Samples synth_lineshape(const LineshapeSynthSpec& spec);
Samples synth_rabi(const RabiSynthSpec& spec);

nlohmann::json to_json(const ReflectionParams& p);
nlohmann::json truth_json(const ReflectionSynthSpec& spec);
nlohmann::json truth_json(const PowerMapSpec& spec);
nlohmann::json truth_json(const GateMapSpec& spec, const SweepResult& sweep);
nlohmann::json truth_json(const TwoToneSpec& spec, const SweepResult& sweep);
nlohmann::json truth_json(const LineshapeSynthSpec& spec);
nlohmann::json truth_json(const RabiSynthSpec& spec);

}  // namespace cqed
