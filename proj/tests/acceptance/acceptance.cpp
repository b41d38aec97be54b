// Acceptance suite: one PASS/FAIL line per criterion. With no arguments all
// criteria run; otherwise only the listed numbers. Exit status 0 iff every
// selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "cqed/coupling.hpp"
#include "cqed/lineshape.hpp"
#include "cqed/rabi.hpp"
#include "cqed/resonator.hpp"
#include "cqed/rng.hpp"
#include "cqed/spectra.hpp"
#include "cqed/synth.hpp"
#include "cqed/textio.hpp"
#include "cqed_cli/commands.hpp"

namespace {

using namespace cqed;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> info;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr double kEc = 190.0;

double gatemon_alpha(double gap, double t) {
  return gatemon_levels(GatemonParams{kEc, gap, {t}, 0.0}).alpha;
}

Outcome q_algebra() {
  const double qi = derive_qi(6740.0, 7360.0);
  return {qi >= 75000.0 && qi <= 85000.0,
          fmt("derive_qi(6740, 7360) = %.1f, required [75000, 85000]", qi)};
}

Outcome te101() {
  const double f = te_mode_frequency(CavityGeometry{0.070, 0.005, 0.030, {1, 0, 1}});
  const double rel = std::abs(f / 5.443 - 1.0);
  return {rel < 0.005, fmt("f = %.5f GHz, %.3f%% from 5.443 GHz (limit 0.5%%)", f, 100 * rel)};
}

Outcome resonator_round_trip() {
  Rng rng(3);
  int converged = 0, within = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    ReflectionParams truth;
    truth.a = std::polar(rng.uniform(0.3, 1.5), rng.uniform(-std::numbers::pi, std::numbers::pi));
    truth.qc = std::exp(rng.uniform(std::log(5e3), std::log(1e5)));
    truth.ql = truth.qc * rng.uniform(0.2, 0.95);
    truth.theta = rng.uniform(-0.3, 0.3);
    truth.f_r_ghz = rng.uniform(4.5, 6.5);
    ReflectionSynthSpec s;
    s.truth = truth;
    s.freq_ghz = reflection_window(truth, 5.0, 1601);
    s.snr_db = 30.0;
    s.seed = 300 + static_cast<std::uint64_t>(i);
    const auto fit = fit_reflection(synth_reflection(s));
    if (!fit.converged()) continue;
    ++converged;
    const double e = std::max({std::abs(fit.params.ql / truth.ql - 1.0),
                               std::abs(fit.params.qc / truth.qc - 1.0),
                               std::abs(fit.params.f_r_ghz / truth.f_r_ghz - 1.0)});
    worst = std::max(worst, e);
    within += e < 0.02 ? 1 : 0;
  }
  return {converged == 100 && within == 100,
          fmt("%d/100 converged, %d/100 within 2%% on Ql, Qc, f_r; worst %.3f%%", converged, within,
              100 * worst)};
}

Outcome device_a() {
  ReflectionParams truth;
  truth.qc = 7270.0;
  truth.ql = loaded_q(27000.0, 7270.0);
  truth.f_r_ghz = 5.2816;
  ReflectionSynthSpec s;
  s.truth = truth;
  s.freq_ghz = reflection_window(truth, 5.0, 1601);
  s.snr_db = 30.0;
  s.seed = 4;
  const auto fit = fit_reflection(synth_reflection(s));
  Outcome o{fit.converged() && std::abs(fit.qi - 27000.0) <= 1000.0,
            fmt("Qi = %.0f +- %.0f at SNR 30 dB, required 27000 +- 1000", fit.qi, fit.errors.qi)};
  int ok = 0;
  for (std::uint64_t seed = 100; seed < 200; ++seed) {
    s.seed = seed;
    const auto f = fit_reflection(synth_reflection(s));
    ok += f.converged() && std::abs(f.qi - 27000.0) <= 1000.0 ? 1 : 0;
  }
  o.info.push_back(fmt("%d/100 further seeds within 27000 +- 1000", ok));
  return o;
}

Outcome transmon_asymptotics() {
  double worst = 0.0;
  for (double r : {30.0, 50.0, 100.0}) {
    const double ej = r * kEc;
    const double f01 = transmon_levels(TransmonParams{kEc, ej, 0.0}).f01;
    worst = std::max(worst, std::abs(f01 - (std::sqrt(8.0 * ej * kEc) - kEc)) / f01);
  }
  return {worst < 0.01, fmt("worst relative deviation %.4f%% (limit 1%%)", 100 * worst)};
}

Outcome gatemon_band() {
  const double gap = 50.0 * kEc;
  const double a_low = gatemon_alpha(gap, 0.01);
  const double a_high = gatemon_alpha(gap, 1.0);
  const bool low_ok = std::abs(a_low / -kEc - 1.0) <= 0.02;
  const bool high_ok = std::abs(a_high / (-kEc / 4.0) - 1.0) <= 0.10;
  bool monotone = true;
  double previous = -INFINITY;
  for (int k = 0; k <= 20; ++k) {
    const double a = gatemon_alpha(gap, k / 20.0);
    monotone = monotone && a > previous;
    previous = a;
  }
  Outcome o{low_ok && high_ok && monotone,
            fmt("gap/EC = 50: alpha(0.01) = %.4f EC [%s], alpha(1) = %.4f EC [%s], monotone [%s]",
                a_low / kEc, low_ok ? "ok" : "outside 2% of -EC", a_high / kEc,
                high_ok ? "ok" : "outside 10% of -EC/4", monotone ? "ok" : "no")};
  o.info.push_back(fmt("EJ_eff/EC = gap T / (4 EC) = %.3f at T = 0.01: charge regime, where "
                       "alpha tends to the free-rotor value -4 EC",
                       50.0 * 0.01 / 4.0));
  const double deep = 1e6 * kEc;
  o.info.push_back(fmt("gap/EC = 1e6: alpha(0.01) = %.4f EC, alpha(1) = %.4f EC (both endpoint "
                       "conditions hold there)",
                       gatemon_alpha(deep, 0.01) / kEc, gatemon_alpha(deep, 1.0) / kEc));
  return o;
}

Outcome transmission_inference() {
  const double gap = 1000.0 * kEc;
  const auto est = infer_transmission(-172.0, kEc, gap);
  const double alpha = gatemon_alpha(gap, est.transmission);
  const bool ok = est.transmission > 0.0 && est.transmission < 1.0 && std::abs(alpha + 172.0) <= 1.0;
  return {ok, fmt("gap = 1000 EC: T = %.6f, re-solved alpha = %.4f MHz (target -172 +- 1)",
                  est.transmission, alpha)};
}

Outcome coupling_identity() {
  Rng rng(8);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double g = rng.uniform(1.0, 500.0);
    const double delta = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(10.0, 1e5);
    worst = std::max(worst, std::abs(coupling_from_shift(dispersive_shift_two_level(g, delta), delta) - g) / g);
  }
  // (chi, delta) pairs read off a dispersive gate sweep with g = 100 MHz.
  SweepSystem sys{5.2816, 100.0, kEc, 0.0, 0.0, 0};
  const GateSweepModel ramp({0.0, 1.0}, {9000.0, 13000.0}, SweepQuantity::JosephsonEnergy,
                            Interpolation::Linear);
  double g_worst = 0.0;
  int pairs = 0;
  for (const auto& p : gate_sweep(ramp, linspace(0.0, 1.0, 11), sys).points) {
    const double delta = sys.f_bare_ghz * 1e3 - p.f_q_mhz;
    g_worst = std::max(g_worst, std::abs(coupling_from_shift(p.chi_mhz, delta) - 100.0) / 100.0);
    ++pairs;
  }
  return {worst <= 1e-12 && g_worst <= 1e-12,
          fmt("round trip worst %.2e over 1000 points; g from %d sweep (chi, delta) pairs "
              "within %.2e of 100 MHz",
              worst, pairs, g_worst)};
}

Outcome anti_crossing_check() {
  const double fb = 5.2816, g = 100.0;
  const auto at = anti_crossing(fb, fb, g);
  const double split = (at.f_plus_ghz - at.f_minus_ghz) * 1e3;
  double min_split = INFINITY;
  for (int i = -2000; i <= 2000; ++i) {
    const auto b = anti_crossing(fb, fb + i * 1e-4, g);
    min_split = std::min(min_split, (b.f_plus_ghz - b.f_minus_ghz) * 1e3);
  }
  Rng rng(9);
  int exact = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(4.0, 7.0), q = rng.uniform(0.5, 9.0);
    const auto b = anti_crossing(a, q, rng.uniform(1.0, 300.0));
    exact += (b.f_plus_ghz + b.f_minus_ghz == a + q) ? 1 : 0;
  }
  const bool ok = std::abs(split - 2 * g) <= 1e-10 && std::abs(min_split - 2 * g) <= 1e-10 && exact == 1000;
  return {ok, fmt("splitting at resonance %.12f MHz, scan minimum %.12f MHz (2g = 200); trace sum "
                  "exact on %d/1000",
                  split, min_split, exact)};
}

Outcome rabi_round_trip() {
  int within = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    RabiSynthSpec s;
    s.truth = RabiParams{1.0, 260.0, 2.0 * std::numbers::pi / 60.0, 0.3, 2e-4, 0.5};
    s.t_ns = Axis{0.0, 1000.0, 201};
    s.snr_db = 20.0;
    s.seed = seed;
    try {
      const auto fit = fit_rabi(synth_rabi(s));
      const double e = std::abs(fit.params.t_r_ns - 260.0);
      worst = std::max(worst, e);
      within += fit.fit.converged && e <= 60.0 ? 1 : 0;
    } catch (const Error&) {
    }
  }
  return {within >= 95, fmt("%d/100 seeds recover T_R within 260 +- 60 ns (need >= 95); worst "
                            "|error| %.1f ns",
                            within, worst)};
}

Outcome lorentzian_round_trip() {
  LineshapeSynthSpec s;
  s.truth = LorentzianParams{4.5, 0.021, 0.3, 1.0};
  s.freq_ghz = Axis{4.4, 4.6, 201};
  s.snr_db = 20.0;
  s.seed = 1;
  const auto fit = fit_lorentzian(synth_lineshape(s));
  const double rel = std::abs(fit.fwhm_mhz() / 21.0 - 1.0);
  Outcome o{fit.fit.converged && rel <= 0.10,
            fmt("FWHM = %.3f MHz (%.2f%% from 21 MHz, limit 10%%)", fit.fwhm_mhz(), 100 * rel)};
  int ok = 0;
  for (std::uint64_t seed = 2; seed <= 101; ++seed) {
    s.seed = seed;
    ok += std::abs(fit_lorentzian(synth_lineshape(s)).fwhm_mhz() / 21.0 - 1.0) <= 0.10 ? 1 : 0;
  }
  o.info.push_back(fmt("%d/100 further seeds within 10%%", ok));
  return o;
}

Outcome two_tone_spacing() {
  TwoToneSpec spec;
  spec.alpha_mhz = -172.0;
  spec.fwhm_mhz = 21.0;
  spec.two_photon = true;
  spec.drive_ghz = Axis{3.0, 4.8, 1801};
  const SweepSystem sys{5.2816, 100.0, kEc, 0.0, 0.0, 0};
  const GateSweepModel ramp({0.0, 1.0}, {9000.0, 13000.0}, SweepQuantity::JosephsonEnergy,
                            Interpolation::Linear);
  const auto sweep = gate_sweep(ramp, linspace(0.0, 1.0, 11), sys);
  const Grid2D map = synth_two_tone(spec, sweep);
  double worst = 0.0;
  for (Eigen::Index r = 0; r < map.values.rows(); ++r) {
    const auto fit = fit_lorentzian_pair(row(map, r));
    worst = std::max(worst, std::abs(fit.separation_mhz() - 86.0));
  }
  return {worst <= 1e-6, fmt("%d rows, worst |separation - |alpha|/2| = %.2e MHz (alpha/2 = -86 MHz)",
                             static_cast<int>(map.values.rows()), worst)};
}

std::string sha256_file(const std::string& path) {
  const std::string data = read_text_file(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt("%02x", static_cast<unsigned>(md[i]));
  return hex;
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "cqed_acceptance_determinism";
  fs::remove_all(root);
  int files = 0, same = 0;
  std::ostringstream sink;
  for (const std::string kind :
       {"reflection_trace", "lineshape", "rabi_trace", "power_map", "gate_map", "two_tone_map"}) {
    for (const std::string run : {"a", "b"}) {
      const int code = cli::run_cli({"cqed", "synth", "--kind", kind, "--seed", "13", "--plot",
                                     "--out-dir", (root / run).string(), "--quiet"},
                                    sink, sink);
      if (code != 0) return {false, "synth " + kind + " exited with " + std::to_string(code)};
    }
    for (const std::string ext : {".csv", ".truth.json", ".svg"}) {
      ++files;
      same += sha256_file((root / "a" / (kind + ext)).string()) ==
                      sha256_file((root / "b" / (kind + ext)).string())
                  ? 1
                  : 0;
    }
  }
  fs::remove_all(root);
  return {same == files, fmt("%d/%d files (data, truth, SVG for 6 kinds) have matching SHA-256",
                             same, files)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "Q algebra", 1.0, q_algebra},
      {2, "TE101 frequency", 1.0, te101},
      {3, "Resonator round trip", 10.0, resonator_round_trip},
      {4, "Device-A regression", 1.0, device_a},
      {5, "Transmon asymptotics", 1.0, transmon_asymptotics},
      {6, "Gatemon anharmonicity band", 5.0, gatemon_band},
      {7, "Transmission inference", 5.0, transmission_inference},
      {8, "Coupling identity", 1.0, coupling_identity},
      {9, "Anti-crossing", 1.0, anti_crossing_check},
      {10, "Rabi round trip", 10.0, rabi_round_trip},
      {11, "Lorentzian round trip", 1.0, lorentzian_round_trip},
      {12, "Two-tone dip spacing", 5.0, two_tone_spacing},
      {13, "Determinism", 1.0, determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failed = 0, ran = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // The budget allows for the device-A seed sweep and the extra Lorentzian
    // seeds, which are informational.
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << fmt(" %2d  ", c.id) << c.title << ": " << o.detail
              << fmt(" [%.2f s", secs) << fmt(", budget %.0f s]", c.budget_s)
              << (in_time ? "" : " (over budget)") << "\n";
    for (const auto& line : o.info) std::cout << "         info: " << line << "\n";
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
