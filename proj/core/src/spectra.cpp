#include "cqed/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

namespace cqed {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

template <typename Matrix>
std::vector<double> lowest_eigenvalues(const Matrix& h, int keep) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("self-adjoint eigensolver did not converge");
  }
  const auto& ev = solver.eigenvalues();
  const int n = std::min<int>(keep, static_cast<int>(ev.size()));
  return {ev.data(), ev.data() + n};
}

std::vector<double> transmon_energies(const TransmonParams& p, int n_cut, int keep) {
  const int dim = 2 * n_cut + 1;
  Eigen::VectorXd diag(dim);
  Eigen::VectorXd sub = Eigen::VectorXd::Constant(dim - 1, -0.5 * p.ej_mhz);
  for (int i = 0; i < dim; ++i) {
    const double n = static_cast<double>(i - n_cut) - p.ng;
    diag(i) = 4.0 * p.ec_mhz * n * n;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    // Implicit QL can stall on the exact degeneracies at half-integer ng;
    // the dense path (Householder first) handles those.
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    h.diagonal() = diag;
    h.diagonal(-1) = sub;
    h.diagonal(1) = sub;
    solver.compute(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw ConvergenceError("tridiagonal eigensolver did not converge");
    }
  }
  const auto& ev = solver.eigenvalues();
  const int n = std::min(keep, dim);
  return {ev.data(), ev.data() + n};
}

// Fourier collocation kinetic matrix. Entry (j, l) depends on (j - l) mod M
// only; ng != 0 makes it complex Hermitian.
std::vector<double> gatemon_energies(const GatemonParams& p, int grid_n, int keep) {
  const int m = grid_n;
  const int nmax = (m - 1) / 2;
  const double dphi = 2.0 * std::numbers::pi / m;
  const double scale = 4.0 * p.ec_mhz / m;

  std::vector<double> potential(m, 0.0);
  for (int j = 0; j < m; ++j) {
    const double s = std::sin(0.5 * j * dphi);
    double u = 0.0;
    for (double t : p.transmissions) u -= p.gap_mhz * std::sqrt(1.0 - t * s * s);
    potential[j] = u;
  }

  // Coefficients for offset d = j - l: sum_k k^2 cos, sum_k k sin, sum_k cos.
  std::vector<double> k2cos(m), ksin(m), kcos(m);
  for (int d = 0; d < m; ++d) {
    double a = 0.0, b = 0.0, c = 0.0;
    for (int k = 1; k <= nmax; ++k) {
      const double arg = k * d * dphi;
      a += static_cast<double>(k) * k * std::cos(arg);
      b += k * std::sin(arg);
      c += std::cos(arg);
    }
    k2cos[d] = 2.0 * a;
    ksin[d] = 2.0 * b;
    kcos[d] = 1.0 + 2.0 * c;
  }

  if (p.ng == 0.0) {
    Eigen::MatrixXd h(m, m);
    for (int j = 0; j < m; ++j) {
      for (int l = 0; l < m; ++l) {
        h(j, l) = scale * k2cos[((j - l) % m + m) % m];
      }
      h(j, j) += potential[j];
    }
    return lowest_eigenvalues(h, keep);
  }

  // sum_k (k - ng)^2 e^{ik d} = k2cos - 2 ng (i ksin) + ng^2 kcos
  Eigen::MatrixXcd h(m, m);
  for (int j = 0; j < m; ++j) {
    for (int l = 0; l < m; ++l) {
      const int d = ((j - l) % m + m) % m;
      h(j, l) = scale * std::complex<double>(k2cos[d] + p.ng * p.ng * kcos[d],
                                             -2.0 * p.ng * ksin[d]);
    }
    h(j, j) += potential[j];
  }
  return lowest_eigenvalues(h, keep);
}

}  // namespace

void validate(const TransmonParams& p) {
  require(std::isfinite(p.ec_mhz) && p.ec_mhz > 0.0, "EC must be > 0");
  require(std::isfinite(p.ej_mhz) && p.ej_mhz >= 0.0, "EJ must be >= 0");
  require(std::isfinite(p.ng), "ng must be finite");
}

void validate(const GatemonParams& p) {
  require(std::isfinite(p.ec_mhz) && p.ec_mhz > 0.0, "EC must be > 0");
  require(std::isfinite(p.gap_mhz) && p.gap_mhz >= 0.0, "gap must be >= 0");
  require(!p.transmissions.empty(), "gatemon needs at least one channel transmission");
  for (double t : p.transmissions) {
    require(t >= 0.0 && t <= 1.0, "channel transmission must lie in [0, 1]");
  }
  require(std::isfinite(p.ng), "ng must be finite");
}

QubitSpectrum spectrum_from_levels(std::vector<double> energies) {
  if (energies.size() < 3) throw InputError("need at least three levels for a spectrum");
  std::sort(energies.begin(), energies.end());
  const double e0 = energies.front();
  for (double& e : energies) e -= e0;
  QubitSpectrum s;
  s.levels = std::move(energies);
  s.f01 = s.levels[1];
  s.f12 = s.levels[2] - s.levels[1];
  s.f02 = s.f01 + s.f12;
  s.alpha = s.f12 - s.f01;
  return s;
}

QubitSpectrum transmon_levels(const TransmonParams& p, int n_cut) {
  SolverOptions opts;
  opts.basis = n_cut;
  return transmon_levels(p, opts);
}

QubitSpectrum transmon_levels(const TransmonParams& p, const SolverOptions& opts) {
  validate(p);
  const int n_cut = opts.basis > 0 ? opts.basis : kDefaultChargeCutoff;
  require(n_cut >= 10, "charge cutoff must be >= 10");
  const int keep = std::max(opts.keep_levels, 3);
  auto spec = spectrum_from_levels(transmon_energies(p, n_cut, keep));
  if (opts.check_convergence) {
    const auto fine = spectrum_from_levels(transmon_energies(p, 2 * n_cut, keep));
    const double drift = std::abs(fine.f01 - spec.f01);
    if (!(drift < opts.convergence_tol_mhz)) {
      throw TruncationError("transmon charge cutoff " + std::to_string(n_cut) +
                                " not converged: f01 moved " + std::to_string(drift) +
                                " MHz on doubling",
                            drift);
    }
  }
  return spec;
}

QubitSpectrum gatemon_levels(const GatemonParams& p, int grid_n) {
  SolverOptions opts;
  opts.basis = grid_n;
  return gatemon_levels(p, opts);
}

QubitSpectrum gatemon_levels(const GatemonParams& p, const SolverOptions& opts) {
  validate(p);
  const int grid_n = opts.basis > 0 ? opts.basis : kDefaultPhaseGrid;
  require(grid_n >= 101 && grid_n % 2 == 1, "phase grid must be odd and >= 101");
  const int keep = std::max(opts.keep_levels, 3);
  auto spec = spectrum_from_levels(gatemon_energies(p, grid_n, keep));
  if (opts.check_convergence) {
    const auto fine = spectrum_from_levels(gatemon_energies(p, 2 * grid_n - 1, keep));
    const double drift = std::abs(fine.f01 - spec.f01);
    if (!(drift < opts.convergence_tol_mhz)) {
      throw TruncationError("gatemon phase grid " + std::to_string(grid_n) +
                                " not converged: f01 moved " + std::to_string(drift) +
                                " MHz on refinement",
                            drift);
    }
  }
  return spec;
}

QubitSpectrum qubit_levels(const QubitParams& p, const SolverOptions& opts) {
  return std::visit(
      [&](const auto& q) -> QubitSpectrum {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, TransmonParams>) {
          return transmon_levels(q, opts);
        } else {
          return gatemon_levels(q, opts);
        }
      },
      p);
}

TransmissionEstimate infer_transmission(double alpha_mhz, double ec_mhz, double gap_mhz,
                                        int grid_n, double tol_mhz) {
  require(std::isfinite(alpha_mhz), "alpha must be finite");
  require(gap_mhz > 0.0, "gap must be > 0 to infer a transmission");

  GatemonParams p{ec_mhz, gap_mhz, {0.0}, 0.0};
  validate(p);
  SolverOptions opts;
  opts.basis = grid_n;
  opts.check_convergence = false;
  opts.keep_levels = 3;
  auto alpha_at = [&](double t) {
    p.transmissions[0] = t;
    return gatemon_levels(p, opts).alpha;
  };

  // Dense near T = 0, where alpha climbs out of the charge regime quickly.
  std::vector<double> grid{0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 2e-2};
  for (int k = 1; k <= 40; ++k) grid.push_back(0.025 * k);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> alphas;
  alphas.reserve(grid.size());
  for (double t : grid) alphas.push_back(alpha_at(t));

  const auto [lo_it, hi_it] = std::minmax_element(alphas.begin(), alphas.end());
  const double band_lo = *lo_it;
  const double band_hi = *hi_it;

  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double fa = alphas[i] - alpha_mhz;
    const double fb = alphas[i + 1] - alpha_mhz;
    if (fa == 0.0) return {grid[i], alphas[i]};
    if (fa * fb > 0.0) continue;

    // Illinois regula falsi on the bracket.
    double a = grid[i], b = grid[i + 1];
    double ya = fa, yb = fb;
    int side = 0;
    for (int it = 0; it < 100 && (b - a) > 1e-12; ++it) {
      const double c = (a * yb - b * ya) / (yb - ya);
      const double yc = alpha_at(c) - alpha_mhz;
      if (std::abs(yc) < 1e-7) return {c, yc + alpha_mhz};
      if (yc * yb > 0.0) {
        b = c;
        yb = yc;
        if (side == 1) ya *= 0.5;
        side = 1;
      } else {
        a = c;
        ya = yc;
        if (side == -1) yb *= 0.5;
        side = -1;
      }
    }
    const double t = std::abs(ya) < std::abs(yb) ? a : b;
    return {t, alpha_at(t)};
  }

  // Outside the band: snap to the nearer end when within tolerance.
  if (alpha_mhz > band_hi && alpha_mhz - band_hi <= tol_mhz) {
    const auto idx = static_cast<std::size_t>(hi_it - alphas.begin());
    return {grid[idx], band_hi};
  }
  if (alpha_mhz < band_lo && band_lo - alpha_mhz <= tol_mhz) {
    const auto idx = static_cast<std::size_t>(lo_it - alphas.begin());
    return {grid[idx], band_lo};
  }
  throw NoSolutionError("anharmonicity " + std::to_string(alpha_mhz) +
                            " MHz outside the attainable band [" + std::to_string(band_lo) +
                            ", " + std::to_string(band_hi) + "] MHz",
                        band_lo, band_hi);
}

void validate(const CavityGeometry& g) {
  require(g.length_a_m > 0.0 && g.width_b_m > 0.0 && g.height_d_m > 0.0,
          "cavity dimensions must be > 0");
  int zeros = 0;
  for (int idx : g.mode) {
    require(idx >= 0, "mode indices must be non-negative");
    zeros += idx == 0 ? 1 : 0;
  }
  require(zeros <= 1, "at most one mode index may be zero");
}

double te_mode_frequency(const CavityGeometry& geom) {
  validate(geom);
  const double ka = geom.mode[0] / geom.length_a_m;
  const double kb = geom.mode[1] / geom.width_b_m;
  const double kd = geom.mode[2] / geom.height_d_m;
  return 0.5 * kSpeedOfLight * std::sqrt(ka * ka + kb * kb + kd * kd) * 1e-9;
}

nlohmann::json to_json(const QubitSpectrum& s) {
  return {{"levels", s.levels}, {"f01", s.f01},     {"f12", s.f12},
          {"f02", s.f02},       {"alpha", s.alpha}, {"units", "MHz"}};
}

}  // namespace cqed
