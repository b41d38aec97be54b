#pragma once

#include <array>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqed/error.hpp"

namespace cqed {

// All qubit energies are frequencies E/h in MHz.

struct TransmonParams {
  double ec_mhz = 0.0;
  double ej_mhz = 0.0;
  double ng = 0.0;
};

// Josephson junction built from Andreev channels with transparencies in [0, 1].
struct GatemonParams {
  double ec_mhz = 0.0;
  double gap_mhz = 0.0;
  std::vector<double> transmissions{};
  double ng = 0.0;
};

using QubitParams = std::variant<TransmonParams, GatemonParams>;

void validate(const TransmonParams& p);
void validate(const GatemonParams& p);

struct QubitSpectrum {
  std::vector<double> levels;  // E_k - E_0, ascending, MHz
  double f01 = 0.0;
  double f12 = 0.0;
  double f02 = 0.0;
  double alpha = 0.0;  // f12 - f01
};

QubitSpectrum spectrum_from_levels(std::vector<double> energies);

struct SolverOptions {
  // Charge cutoff for the transmon (dimension 2 n + 1) or number of phase
  // grid points for the gatemon (odd).
  int basis = 0;
  bool check_convergence = true;
  double convergence_tol_mhz = 0.01;
  int keep_levels = 8;
};

inline constexpr int kDefaultChargeCutoff = 30;
inline constexpr int kDefaultPhaseGrid = 201;

// Cooper-pair box Hamiltonian 4EC(n-ng)^2 - EJ/2 sum(|n><n+1| + h.c.)
// diagonalised in the charge basis |n| <= n_cut.
QubitSpectrum transmon_levels(const TransmonParams& p, int n_cut = kDefaultChargeCutoff);
QubitSpectrum transmon_levels(const TransmonParams& p, const SolverOptions& opts);

// Kinetic term 4EC(n-ng)^2 plus U(phi) = -gap sum_i sqrt(1 - T_i sin^2(phi/2)),
// solved by Fourier pseudo-spectral collocation on grid_n points of [0, 2pi).
QubitSpectrum gatemon_levels(const GatemonParams& p, int grid_n = kDefaultPhaseGrid);
QubitSpectrum gatemon_levels(const GatemonParams& p, const SolverOptions& opts);

QubitSpectrum qubit_levels(const QubitParams& p, const SolverOptions& opts = {});

struct TransmissionEstimate {
  double transmission = 0.0;
  double alpha_mhz = 0.0;  // anharmonicity reproduced by the returned T
};

// Inverts alpha(T) of a single-channel gatemon by bracketing and bisection.
// Targets within tol_mhz beyond an end of the attainable band snap to that end.
TransmissionEstimate infer_transmission(double alpha_mhz, double ec_mhz, double gap_mhz,
                                        int grid_n = kDefaultPhaseGrid, double tol_mhz = 1.0);

struct CavityGeometry {
  double length_a_m = 0.0;
  double width_b_m = 0.0;
  double height_d_m = 0.0;
  std::array<int, 3> mode{1, 0, 1};  // (m, n, p) along (a, b, d)
};

void validate(const CavityGeometry& g);

inline constexpr double kSpeedOfLight = 299'792'458.0;

// f = (c/2) sqrt((m/a)^2 + (n/b)^2 + (p/d)^2), in GHz.
double te_mode_frequency(const CavityGeometry& geom);

nlohmann::json to_json(const QubitSpectrum& s);

}  // namespace cqed
