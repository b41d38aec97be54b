#include "cqed/synth.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "cqed/rng.hpp"

namespace cqed {
namespace {

using cd = std::complex<double>;

void check_snr(double snr_db) {
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw InputError("SNR must be a number (dB) or +inf");
  }
}

cd complex_noise(Rng& rng, double rms) {
  if (rms == 0.0) return {};
  const double s = rms / std::numbers::sqrt2;
  const double re = rng.gaussian();
  const double im = rng.gaussian();
  return {s * re, s * im};
}

struct Branch {
  double f_ghz;
  double ql;
  double qc;
};

cd multi_reflection(cd a, const std::vector<Branch>& branches, double f) {
  cd s(1.0, 0.0);
  const cd i1(0.0, 1.0);
  for (const auto& b : branches) {
    s -= 2.0 * b.ql / b.qc / (1.0 + 2.0 * i1 * b.ql * (f - b.f_ghz) / b.f_ghz);
  }
  return a * s;
}

}  // namespace

double noise_scale(double amplitude, double snr_db) {
  check_snr(snr_db);
  if (std::isinf(snr_db)) return 0.0;
  return std::abs(amplitude) * std::pow(10.0, -snr_db / 20.0);
}

std::vector<double> Axis::values() const { return linspace(start, stop, points); }

void validate(const Axis& a, const char* what) {
  if (a.points < 2 || !(a.stop > a.start) || !std::isfinite(a.start) || !std::isfinite(a.stop)) {
    throw InputError(std::string(what) + " axis needs points >= 2 and stop > start");
  }
}

Axis reflection_window(const ReflectionParams& t, double half_span, int points) {
  const double lw = t.f_r_ghz / t.ql;
  return {t.f_r_ghz - half_span * lw, t.f_r_ghz + half_span * lw, points};
}

ComplexTrace synth_reflection(const ReflectionSynthSpec& spec) {
  validate(spec.freq_ghz, "reflection frequency");
  const auto& t = spec.truth;
  if (!(t.ql > 0.0) || !(t.qc > 0.0) || !(t.f_r_ghz > 0.0) ||
      !(std::abs(t.theta) < 0.5 * std::numbers::pi)) {
    throw InputError("reflection truth needs Ql, Qc, f_r > 0 and |theta| < pi/2");
  }
  const double rms = noise_scale(std::abs(t.a), spec.snr_db);
  Rng rng(spec.seed, 0);
  ComplexTrace out;
  out.freqs_ghz = spec.freq_ghz.values();
  out.values.reserve(out.freqs_ghz.size());
  for (double f : out.freqs_ghz) {
    out.values.push_back(reflection_model(t, f) + complex_noise(rng, rms));
  }
  out.metadata["source"] = "synth_reflection";
  out.metadata["seed"] = std::to_string(spec.seed);
  return out;
}

Grid2D synth_power_map(const PowerMapSpec& spec) {
  validate(spec.system);
  validate(spec.freq_ghz, "power-map frequency");
  if (spec.powers_dbm.empty()) throw InputError("power map needs at least one power");
  if (!(spec.qc > 0.0) || !(spec.qi_intrinsic > 0.0)) {
    throw InputError("power map needs Qc > 0 and Qi > 0");
  }
  const auto& sys = spec.system;
  const double delta = sys.detuning_mhz();
  const double chi = dispersive_shift_two_level(sys.g_mhz, delta);
  const double n_crit = critical_photon_number(sys.g_mhz, delta);
  const double qi_low = purcell_induced_cavity_loss(sys.g_mhz, delta, sys.gamma_q_mhz,
                                                    sys.f_bare_ghz + chi * 1e-3,
                                                    spec.qi_intrinsic);
  const double rms = noise_scale(1.0, spec.snr_db);

  Grid2D g;
  g.slow_name = "power_dbm";
  g.fast_name = "freq_ghz";
  g.slow = spec.powers_dbm;
  g.fast = spec.freq_ghz.values();
  g.values.resize(static_cast<Eigen::Index>(g.slow.size()), static_cast<Eigen::Index>(g.fast.size()));
  for (std::size_t r = 0; r < g.slow.size(); ++r) {
    const double n_mean = mean_photon_number(g.slow[r], sys.f_bare_ghz, sys.kappa_mhz,
                                             spec.power_model.line_attenuation_db);
    const double w = dispersive_weight(n_mean, n_crit, spec.power_model.crossover_width);
    const double f_c = sys.f_bare_ghz + chi * w * 1e-3;
    // Purcell broadening follows the same crossover as the shift.
    const double qi = 1.0 / (w / qi_low + (1.0 - w) / spec.qi_intrinsic);
    const std::vector<Branch> br{{f_c, loaded_q(qi, spec.qc), spec.qc}};
    Rng rng(spec.seed, r + 1);
    for (std::size_t c = 0; c < g.fast.size(); ++c) {
      const cd s = multi_reflection(1.0, br, g.fast[c]) + complex_noise(rng, rms);
      g.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::abs(s);
    }
  }
  return g;
}

Grid2D synth_gate_map(const GateMapSpec& spec, const SweepResult& sweep) {
  validate(spec.freq_ghz, "gate-map frequency");
  if (!(spec.qc > 0.0) || !(spec.qi > 0.0) || !(spec.g_mhz > 0.0) || !(spec.f_bare_ghz > 0.0) ||
      spec.gamma_q_mhz < 0.0) {
    throw InputError("gate map needs f_bare, g, Qc, Qi > 0 and gamma_q >= 0");
  }
  const double rms = noise_scale(1.0, spec.snr_db);
  Grid2D g;
  g.slow_name = "v_g";
  g.fast_name = "freq_ghz";
  g.fast = spec.freq_ghz.values();
  g.values.resize(static_cast<Eigen::Index>(sweep.points.size()),
                  static_cast<Eigen::Index>(g.fast.size()));
  for (std::size_t r = 0; r < sweep.points.size(); ++r) {
    const auto& pt = sweep.points[r];
    g.slow.push_back(pt.v_gate);
    std::vector<Branch> br;
    switch (pt.regime) {
      case SweepRegime::PinchOff:
        br.push_back({spec.f_bare_ghz, loaded_q(spec.qi, spec.qc), spec.qc});
        break;
      case SweepRegime::Dispersive: {
        const double delta = spec.f_bare_ghz * 1e3 - pt.f_q_mhz;
        const double qi = purcell_induced_cavity_loss(spec.g_mhz, delta, spec.gamma_q_mhz,
                                                      pt.f_c_ghz, spec.qi);
        br.push_back({pt.f_c_ghz, loaded_q(qi, spec.qc), spec.qc});
        break;
      }
      case SweepRegime::Resonant: {
        const double w_plus =
            cavity_weight_upper(spec.f_bare_ghz, pt.f_q_mhz * 1e-3, spec.g_mhz);
        for (const auto& [f_k, w_k] :
             {std::pair{pt.f_plus_ghz, w_plus}, std::pair{pt.f_minus_ghz, 1.0 - w_plus}}) {
          if (w_k < 1e-6) continue;
          const double kappa_i = w_k * f_k * 1e3 / spec.qi + (1.0 - w_k) * spec.gamma_q_mhz;
          const double qi_k = f_k * 1e3 / kappa_i;
          const double qc_k = spec.qc / w_k;
          br.push_back({f_k, loaded_q(qi_k, qc_k), qc_k});
        }
        break;
      }
    }
    Rng rng(spec.seed, r + 1);
    for (std::size_t c = 0; c < g.fast.size(); ++c) {
      const cd s = multi_reflection(1.0, br, g.fast[c]) + complex_noise(rng, rms);
      g.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::abs(s);
    }
  }
  return g;
}

Grid2D synth_two_tone(const TwoToneSpec& spec, const SweepResult& sweep) {
  validate(spec.drive_ghz, "two-tone drive");
  if (!(spec.fwhm_mhz > 0.0) || !(spec.depth > 0.0) || !(spec.background_period_ghz > 0.0)) {
    throw InputError("two-tone map needs fwhm > 0, depth > 0 and background period > 0");
  }
  const double sigma = noise_scale(spec.depth, spec.snr_db);
  Grid2D g;
  g.slow_name = "v_g";
  g.fast_name = "drive_ghz";
  g.fast = spec.drive_ghz.values();
  g.values.resize(static_cast<Eigen::Index>(sweep.points.size()),
                  static_cast<Eigen::Index>(g.fast.size()));
  const double fwhm = spec.fwhm_mhz * 1e-3;
  for (std::size_t r = 0; r < sweep.points.size(); ++r) {
    const auto& pt = sweep.points[r];
    g.slow.push_back(pt.v_gate);
    const bool active = pt.regime != SweepRegime::PinchOff && pt.f_q_mhz > 0.0;
    const LorentzianParams one{pt.f_q_mhz * 1e-3, fwhm, spec.depth, 0.0};
    const LorentzianParams two{(pt.f_q_mhz + 0.5 * spec.alpha_mhz) * 1e-3, fwhm,
                               spec.depth * spec.two_photon_depth_ratio, 0.0};
    Rng rng(spec.seed, r + 1);
    for (std::size_t c = 0; c < g.fast.size(); ++c) {
      const double f = g.fast[c];
      double v = spec.baseline;
      v += spec.background_amplitude *
           std::sin(2.0 * std::numbers::pi * (f - g.fast.front()) / spec.background_period_ghz);
      if (active) {
        v += lorentzian_dip(one, f);
        if (spec.two_photon) v += lorentzian_dip(two, f);
      }
      if (sigma > 0.0) v += sigma * rng.gaussian();
      g.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return g;
}

Samples synth_lineshape(const LineshapeSynthSpec& spec) {
  validate(spec.freq_ghz, "lineshape frequency");
  if (!(spec.truth.fwhm_ghz > 0.0) || !(spec.truth.depth > 0.0)) {
    throw InputError("lineshape truth needs fwhm > 0 and depth > 0");
  }
  const double sigma = noise_scale(spec.truth.depth, spec.snr_db);
  Rng rng(spec.seed, 0);
  Samples s;
  s.x = spec.freq_ghz.values();
  for (double f : s.x) {
    double v = lorentzian_dip(spec.truth, f);
    if (sigma > 0.0) v += sigma * rng.gaussian();
    s.y.push_back(v);
  }
  return s;
}

Samples synth_rabi(const RabiSynthSpec& spec) {
  validate(spec.t_ns, "Rabi time");
  if (!(spec.truth.t_r_ns > 0.0)) throw InputError("Rabi truth needs T_R > 0");
  const double sigma = noise_scale(spec.truth.amplitude, spec.snr_db);
  Rng rng(spec.seed, 0);
  Samples s;
  s.x = spec.t_ns.values();
  for (double t : s.x) {
    double v = rabi_model(spec.truth, t);
    if (sigma > 0.0) v += sigma * rng.gaussian();
    s.y.push_back(v);
  }
  return s;
}

namespace {

nlohmann::json axis_json(const Axis& a) {
  return {{"start", a.start}, {"stop", a.stop}, {"points", a.points}};
}

nlohmann::json snr_json(double snr_db) {
  return std::isinf(snr_db) ? nlohmann::json(nullptr) : nlohmann::json(snr_db);
}

}  // namespace

nlohmann::json to_json(const ReflectionParams& p) {
  nlohmann::json j = {{"a_re", p.a.real()}, {"a_im", p.a.imag()}, {"ql", p.ql},
                      {"qc", p.qc},         {"theta", p.theta},   {"f_r_ghz", p.f_r_ghz},
                      {"delay_ns", p.delay_ns}};
  if (p.ql > 0.0 && p.ql < p.qc) j["qi"] = derive_qi(p.ql, p.qc);
  return j;
}

nlohmann::json truth_json(const ReflectionSynthSpec& spec) {
  return {{"kind", "reflection_trace"}, {"truth", to_json(spec.truth)},
          {"freq_ghz", axis_json(spec.freq_ghz)}, {"snr_db", snr_json(spec.snr_db)},
          {"seed", spec.seed}};
}

nlohmann::json truth_json(const PowerMapSpec& spec) {
  const auto& s = spec.system;
  return {{"kind", "power_map"},
          {"truth",
           {{"f_bare_ghz", s.f_bare_ghz}, {"g_mhz", s.g_mhz}, {"f01_mhz", s.qubit.f01},
            {"kappa_mhz", s.kappa_mhz}, {"gamma_q_mhz", s.gamma_q_mhz}, {"qc", spec.qc},
            {"qi_intrinsic", spec.qi_intrinsic},
            {"chi_mhz", dispersive_shift_two_level(s.g_mhz, s.detuning_mhz())},
            {"line_attenuation_db", spec.power_model.line_attenuation_db},
            {"crossover_width", spec.power_model.crossover_width}}},
          {"powers_dbm", spec.powers_dbm},
          {"freq_ghz", axis_json(spec.freq_ghz)},
          {"snr_db", snr_json(spec.snr_db)},
          {"seed", spec.seed}};
}

nlohmann::json truth_json(const GateMapSpec& spec, const SweepResult& sweep) {
  return {{"kind", "gate_map"},
          {"truth",
           {{"f_bare_ghz", spec.f_bare_ghz}, {"g_mhz", spec.g_mhz}, {"qc", spec.qc},
            {"qi", spec.qi}, {"gamma_q_mhz", spec.gamma_q_mhz}}},
          {"sweep", to_json(sweep)},
          {"freq_ghz", axis_json(spec.freq_ghz)},
          {"snr_db", snr_json(spec.snr_db)},
          {"seed", spec.seed}};
}

nlohmann::json truth_json(const TwoToneSpec& spec, const SweepResult& sweep) {
  return {{"kind", "two_tone_map"},
          {"truth",
           {{"alpha_mhz", spec.alpha_mhz}, {"fwhm_mhz", spec.fwhm_mhz}, {"depth", spec.depth},
            {"baseline", spec.baseline}, {"two_photon", spec.two_photon},
            {"two_photon_depth_ratio", spec.two_photon_depth_ratio},
            {"background_amplitude", spec.background_amplitude},
            {"background_period_ghz", spec.background_period_ghz}}},
          {"sweep", to_json(sweep)},
          {"drive_ghz", axis_json(spec.drive_ghz)},
          {"snr_db", snr_json(spec.snr_db)},
          {"seed", spec.seed}};
}

nlohmann::json truth_json(const LineshapeSynthSpec& spec) {
  const auto& t = spec.truth;
  return {{"kind", "lineshape_trace"},
          {"truth",
           {{"f0_ghz", t.f0_ghz}, {"fwhm_mhz", t.fwhm_ghz * 1e3}, {"depth", t.depth},
            {"offset", t.offset}}},
          {"freq_ghz", axis_json(spec.freq_ghz)},
          {"snr_db", snr_json(spec.snr_db)},
          {"seed", spec.seed}};
}

nlohmann::json truth_json(const RabiSynthSpec& spec) {
  const auto& t = spec.truth;
  return {{"kind", "rabi_trace"},
          {"truth",
           {{"amplitude", t.amplitude}, {"t_r_ns", t.t_r_ns}, {"omega_rad_per_ns", t.omega},
            {"phase_rad", t.phase}, {"slope_per_ns", t.slope}, {"offset", t.offset}}},
          {"t_ns", axis_json(spec.t_ns)},
          {"snr_db", snr_json(spec.snr_db)},
          {"seed", spec.seed}};
}

}  // namespace cqed
