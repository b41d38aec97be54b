#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cqed/background.hpp"
#include "cqed/io.hpp"
#include "cqed/lineshape.hpp"
#include "cqed/resonator.hpp"
#include "cqed/rng.hpp"
#include "cqed/synth.hpp"

namespace {

using namespace cqed;

ReflectionParams reference_truth() {
  ReflectionParams p;
  p.a = {1.0, 0.0};
  p.ql = 6740.0;
  p.qc = 7360.0;
  p.f_r_ghz = 5.443;
  return p;
}

ReflectionSynthSpec reflection_spec(double snr, std::uint64_t seed) {
  ReflectionSynthSpec s;
  s.truth = reference_truth();
  s.freq_ghz = reflection_window(s.truth, 5.0, 401);
  s.snr_db = snr;
  s.seed = seed;
  return s;
}

TEST(SynthReflection, NoiselessEqualsModel) {
  const auto spec = reflection_spec(kNoiseless, 1);
  const auto t = synth_reflection(spec);
  ASSERT_EQ(t.values.size(), 401u);
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    EXPECT_EQ(t.values[i], reflection_model(spec.truth, t.freqs_ghz[i]));
  }
}

TEST(SynthReflection, ReferenceDipDepth) {
  const auto t = synth_reflection(reflection_spec(kNoiseless, 0));
  double min_mag = INFINITY;
  for (const auto& v : t.values) min_mag = std::min(min_mag, std::abs(v));
  EXPECT_NEAR(min_mag, std::abs(1.0 - 2.0 * 6740.0 / 7360.0), 1e-4);
}

TEST(SynthReflection, NoiseLevelMatchesSnr) {
  const auto spec = reflection_spec(30.0, 5);
  const auto noisy = synth_reflection(spec);
  const auto clean = synth_reflection(reflection_spec(kNoiseless, 5));
  double acc = 0.0;
  for (std::size_t i = 0; i < noisy.values.size(); ++i) acc += std::norm(noisy.values[i] - clean.values[i]);
  const double rms = std::sqrt(acc / static_cast<double>(noisy.values.size()));
  EXPECT_NEAR(rms, noise_scale(1.0, 30.0), 0.1 * noise_scale(1.0, 30.0));
}

TEST(SynthReflection, ByteIdenticalForSameSeed) {
  EXPECT_EQ(reflection_csv(synth_reflection(reflection_spec(30.0, 9))),
            reflection_csv(synth_reflection(reflection_spec(30.0, 9))));
  EXPECT_NE(reflection_csv(synth_reflection(reflection_spec(30.0, 9))),
            reflection_csv(synth_reflection(reflection_spec(30.0, 10))));
}

TEST(Rng, KnownStreamValues) {
  // Reference values from an independent Python implementation of
  // SplitMix64 and xoshiro256** (tests/oracles/rng_oracle.py).
  SplitMix64 sm(1234567);
  EXPECT_EQ(sm.next(), 6457827717110365317ULL);
  EXPECT_EQ(sm.next(), 3203168211198807973ULL);
  Rng a(42);
  EXPECT_EQ(a.next_u64(), 1546998764402558742ULL);
  EXPECT_EQ(a.next_u64(), 6990951692964543102ULL);
  EXPECT_EQ(a.next_u64(), 12544586762248559009ULL);
  EXPECT_EQ(Rng(42, 3).next_u64(), 11460371345641712736ULL);
}

TEST(Rng, GaussianMoments) {
  Rng rng(5);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    s += g;
    s2 += g * g;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

PowerMapSpec power_spec() {
  PowerMapSpec s;
  s.system.f_bare_ghz = 5.2816;
  s.system.g_mhz = 100.0;
  s.system.qubit.f01 = 5281.6 - 1000.0;
  s.system.kappa_mhz = 0.9;
  s.system.gamma_q_mhz = 44.0;
  s.qc = 7270.0;
  s.qi_intrinsic = 27000.0;
  for (int i = 0; i <= 40; ++i) s.powers_dbm.push_back(-160.0 + 3.0 * i);
  s.freq_ghz = Axis{5.2716, 5.3016, 601};
  return s;
}

double dip_position(const Grid2D& g, Eigen::Index r) {
  Eigen::Index c;
  g.values.row(r).minCoeff(&c);
  return g.fast[static_cast<std::size_t>(c)];
}

TEST(SynthPowerMap, PlateausAndMigration) {
  const auto spec = power_spec();
  const auto g = synth_power_map(spec);
  ASSERT_EQ(g.values.rows(), 41);
  ASSERT_EQ(g.values.cols(), 601);
  const double step = 0.03 / 600.0;
  EXPECT_NEAR(dip_position(g, 0), 5.2816 + 0.010, step);
  EXPECT_NEAR(dip_position(g, 40), 5.2816, step);
  for (Eigen::Index r = 1; r < g.values.rows(); ++r) {
    EXPECT_LE(dip_position(g, r), dip_position(g, r - 1) + 1e-12);
  }
}

TEST(SynthPowerMap, PurcellBroadensLowPowerRow) {
  const auto g = synth_power_map(power_spec());
  // |S|^2 = 1 - 4 rho (1 - rho) / (1 + x^2) is Lorentzian with FWHM f / Ql.
  auto width = [&](Eigen::Index r) {
    const Eigen::RowVectorXd p = g.values.row(r).array().square();
    const double half = 0.5 * (p.minCoeff() + p.maxCoeff());
    return static_cast<double>((p.array() < half).count());
  };
  EXPECT_GT(width(0), width(40));
}

SweepResult crossing_sweep() {
  SweepSystem sys;
  sys.f_bare_ghz = 5.2816;
  sys.g_mhz = 100.0;
  sys.ec_mhz = 190.0;
  const GateSweepModel m({0.0, 1.0, 2.0}, {0.0, 0.0, 25000.0}, SweepQuantity::JosephsonEnergy,
                         Interpolation::Linear);
  return gate_sweep(m, linspace(0.0, 2.0, 81), sys);
}

GateMapSpec gate_spec() {
  GateMapSpec s;
  s.f_bare_ghz = 5.2816;
  s.g_mhz = 100.0;
  s.qc = 7270.0;
  s.qi = 27000.0;
  s.gamma_q_mhz = 5.0;
  s.freq_ghz = Axis{5.0, 5.6, 1201};
  return s;
}

TEST(SynthGateMap, ShapeAndPinchOff) {
  const auto sweep = crossing_sweep();
  const auto g = synth_gate_map(gate_spec(), sweep);
  ASSERT_EQ(g.values.rows(), 81);
  ASSERT_EQ(g.values.cols(), 1201);
  EXPECT_EQ(g.slow.front(), 0.0);
  EXPECT_NEAR(dip_position(g, 0), 5.2816, 0.6 / 1200.0);
}

TEST(SynthGateMap, DipCentresTrackSweep) {
  const auto sweep = crossing_sweep();
  const auto spec = gate_spec();
  const auto g = synth_gate_map(spec, sweep);
  const double half_linewidth = 0.5 * 5.2816 / loaded_q(27000.0, 7270.0);
  for (std::size_t r = 0; r < sweep.points.size(); ++r) {
    if (sweep.points[r].regime == SweepRegime::Resonant) continue;
    EXPECT_NEAR(dip_position(g, static_cast<Eigen::Index>(r)), sweep.points[r].f_c_ghz,
                half_linewidth + 0.6 / 1200.0)
        << "row " << r;
  }
}

TEST(SynthGateMap, ResonantRowsShowTwoBranches) {
  const auto sweep = crossing_sweep();
  const auto g = synth_gate_map(gate_spec(), sweep);
  // Row closest to resonance: deepest local minima near f_plus and f_minus.
  std::size_t best = 0;
  double best_split = INFINITY;
  for (std::size_t r = 0; r < sweep.points.size(); ++r) {
    const double split = sweep.points[r].f_plus_ghz - sweep.points[r].f_minus_ghz;
    if (sweep.points[r].regime == SweepRegime::Resonant && split < best_split) {
      best_split = split;
      best = r;
    }
  }
  ASSERT_LT(best_split, 0.21);
  const auto& pt = sweep.points[best];
  const Eigen::RowVectorXd row = g.values.row(static_cast<Eigen::Index>(best));
  auto local_min_near = [&](double f) {
    double m = INFINITY, at = 0.0;
    for (std::size_t c = 0; c < g.fast.size(); ++c) {
      if (std::abs(g.fast[c] - f) < 0.02 && row(static_cast<Eigen::Index>(c)) < m) {
        m = row(static_cast<Eigen::Index>(c));
        at = g.fast[c];
      }
    }
    return std::pair{m, at};
  };
  const auto [m_plus, f_plus] = local_min_near(pt.f_plus_ghz);
  const auto [m_minus, f_minus] = local_min_near(pt.f_minus_ghz);
  EXPECT_NEAR(f_plus, pt.f_plus_ghz, 0.002);
  EXPECT_NEAR(f_minus, pt.f_minus_ghz, 0.002);
  EXPECT_LT(m_plus, 0.95);
  EXPECT_LT(m_minus, 0.95);
}

TwoToneSpec two_tone_spec() {
  TwoToneSpec s;
  s.alpha_mhz = -172.0;
  s.fwhm_mhz = 21.0;
  s.depth = 1.0;
  s.two_photon = true;
  s.drive_ghz = Axis{3.0, 4.8, 1801};
  return s;
}

SweepResult dispersive_sweep() {
  SweepSystem sys;
  sys.f_bare_ghz = 5.2816;
  sys.g_mhz = 100.0;
  sys.ec_mhz = 190.0;
  const GateSweepModel m({0.0, 1.0}, {9000.0, 13000.0}, SweepQuantity::JosephsonEnergy,
                         Interpolation::Linear);
  return gate_sweep(m, linspace(0.0, 1.0, 11), sys);
}

TEST(SynthTwoTone, DipSpacingIsHalfAnharmonicity) {
  const auto sweep = dispersive_sweep();
  const auto g = synth_two_tone(two_tone_spec(), sweep);
  for (Eigen::Index r = 0; r < g.values.rows(); ++r) {
    const auto fit = fit_lorentzian_pair(row(g, r));
    EXPECT_NEAR(fit.separation_mhz(), 86.0, 1e-6) << "row " << r;
    EXPECT_NEAR(fit.high.f0_ghz * 1e3, sweep.points[static_cast<std::size_t>(r)].f_q_mhz, 1e-6);
    EXPECT_GT(fit.high.depth, fit.low.depth);
  }
}

TEST(SynthTwoTone, SingleDipWithoutTwoPhoton) {
  auto spec = two_tone_spec();
  spec.two_photon = false;
  const auto sweep = dispersive_sweep();
  const auto g = synth_two_tone(spec, sweep);
  const auto fit = fit_lorentzian(row(g, 3));
  EXPECT_NEAR(fit.params.f0_ghz * 1e3, sweep.points[3].f_q_mhz, 1e-6);
  EXPECT_THROW(fit_lorentzian_pair(row(g, 3)), NoFitError);
}

TEST(SynthTwoTone, BackgroundRemovedBySubtraction) {
  auto spec = two_tone_spec();
  spec.two_photon = false;
  spec.background_amplitude = 3.0;
  spec.drive_ghz = Axis{2.5, 6.5, 801};
  SweepSystem sys;
  sys.f_bare_ghz = 7.0;
  sys.g_mhz = 100.0;
  sys.ec_mhz = 190.0;
  // Wide gate range so each drive column is mostly featureless.
  const GateSweepModel m({0.0, 1.0}, {5000.0, 18000.0}, SweepQuantity::JosephsonEnergy,
                         Interpolation::Linear);
  const auto sweep = gate_sweep(m, linspace(0.0, 1.0, 101), sys);
  const auto with_bg = synth_two_tone(spec, sweep);
  spec.background_amplitude = 0.0;
  const auto clean = synth_two_tone(spec, sweep);
  const auto restored = subtract_background(with_bg);
  const auto reference = subtract_background(clean);
  EXPECT_LT((restored.values - reference.values).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(std::abs(restored.values.minCoeff() - clean.values.minCoeff()), 0.05);
}

TEST(SynthTwoTone, GridIntegrity) {
  const auto sweep = dispersive_sweep();
  const auto g = synth_two_tone(two_tone_spec(), sweep);
  EXPECT_EQ(g.values.rows(), 11);
  EXPECT_EQ(g.values.cols(), 1801);
  EXPECT_EQ(g.fast.size(), 1801u);
  EXPECT_EQ(g.slow.size(), 11u);
}

TEST(SynthLineshape, RoundTripAndDeterminism) {
  LineshapeSynthSpec s;
  s.truth = LorentzianParams{4.4, 0.021, 0.5, 1.0};
  s.freq_ghz = Axis{4.3, 4.5, 201};
  s.snr_db = 30.0;
  s.seed = 77;
  const auto a = synth_lineshape(s), b = synth_lineshape(s);
  EXPECT_EQ(magnitude_db_csv(a), magnitude_db_csv(b));
  EXPECT_NEAR(fit_lorentzian(a).fwhm_mhz(), 21.0, 2.1);
}

TEST(SynthTruth, SidecarsCarryTruth) {
  const auto spec = reflection_spec(30.0, 1);
  const auto j = truth_json(spec);
  EXPECT_EQ(j["kind"], "reflection_trace");
  EXPECT_DOUBLE_EQ(j["truth"]["ql"].get<double>(), 6740.0);
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), 1u);
}

}  // namespace
