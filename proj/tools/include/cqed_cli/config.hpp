#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cqed/coupling.hpp"
#include "cqed/lineshape.hpp"
#include "cqed/rabi.hpp"
#include "cqed/resonator.hpp"
#include "cqed/synth.hpp"

namespace cqed::cli {

// Every numeric key carries its unit as a suffix (_ghz, _mhz, _ns, _mm, _v,
// _dbm, _db, _rad); dimensionless keys have none. Unknown keys are rejected.

struct QubitConfig {
  std::string kind = "transmon";  // transmon | gatemon
  double ec_mhz = 190.0;
  double ej_mhz = 0.0;
  double gap_mhz = 0.0;
  std::vector<double> transmissions{};
  double ng = 0.0;
  int basis = 0;  // 0: default charge cutoff or phase grid
  int levels = 8;
  std::optional<double> infer_alpha_mhz;  // invert alpha(T) for the gatemon
  int alpha_table_points = 0;             // tabulate alpha(T) on [0, 1]
};

struct CavityConfig {
  double length_a_mm = 70.0;
  double width_b_mm = 5.0;
  double height_d_mm = 30.0;
  std::array<int, 3> mode{1, 0, 1};
  std::optional<double> g_mhz;
  std::optional<double> f_q_mhz;
  std::optional<double> alpha_mhz;
  std::optional<double> chi_mhz;      // with delta_mhz: estimate g
  std::optional<double> delta_mhz;
};

struct SweepConfig {
  std::string quantity = "ej";  // ej | transmission
  std::string table;            // CSV with V_G,EJ_MHz or V_G,T
  std::string interpolation = "monotone_cubic";
  std::optional<NanowireProfile> nanowire;
  double v_start_v = 0.0;
  double v_stop_v = 10.0;
  int points = 101;
  SweepSystem system{5.2816, 100.0, 190.0, 0.0, 0.0, 0};
};

struct SynthConfig {
  std::string kind = "reflection_trace";
  std::uint64_t seed = 1;
  double snr_db = 30.0;
  std::optional<ReflectionSynthSpec> reflection;
  std::optional<LineshapeSynthSpec> lineshape;
  std::optional<RabiSynthSpec> rabi;
  std::optional<PowerMapSpec> power_map;
  std::optional<GateMapSpec> gate_map;
  std::optional<TwoToneSpec> two_tone;
};

struct Tolerance {
  std::string quantity;
  std::optional<double> truth;  // defaults to the synthesis truth
  double value = 0.0;
  bool relative = true;
};

struct PipelineStage {
  std::string name;
  std::optional<SynthConfig> synth;
  std::optional<SweepConfig> sweep;  // for gate/two-tone maps
  std::string input;                 // alternative to synth
  std::string fit;                   // reflection | lorentzian | lorentzian_pair | rabi
  bool fit_delay = false;
  std::vector<Tolerance> tolerances;
};

struct PipelineConfig {
  std::vector<PipelineStage> stages;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::optional<QubitConfig> qubit;
  std::optional<CavityConfig> cavity;
  std::optional<SweepConfig> sweep;
  std::optional<SynthConfig> synth;
  bool fit_delay = false;
  std::optional<PipelineConfig> pipeline;
};

// Throws InputError naming the offending key path.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& yaml_text);

// Copies the block-level seed and SNR into the per-kind spec.
void apply_seed_and_snr(SynthConfig& c);

// Sweep used by gate and two-tone maps when no sweep_gate block is given.
SweepConfig default_sweep(const std::string& synth_kind);

// Defaults for each synthetic kind, taken from the reference device.
SynthConfig default_synth(const std::string& kind);

PipelineConfig default_pipeline();

GateSweepModel sweep_model(const SweepConfig& c);
std::vector<double> sweep_points(const SweepConfig& c);

}  // namespace cqed::cli
