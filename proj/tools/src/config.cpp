#include "cqed_cli/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cqed/error.hpp"
#include "cqed/textio.hpp"

namespace cqed::cli {
namespace {

// Strict view of one YAML mapping: every key read is recorded, and finish()
// rejects the rest.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw InputError(path_ + ": expected a mapping of key: value pairs");
    }
  }

  const std::string& path() const { return path_; }

  bool has(const std::string& key) {
    allowed_.insert(key);
    return static_cast<bool>(node_) && node_.IsMap() && static_cast<bool>(node_[key]);
  }

  YAML::Node raw(const std::string& key) {
    allowed_.insert(key);
    return has(key) ? node_[key] : YAML::Node();
  }

  Section child(const std::string& key) { return Section(raw(key), where(key)); }

  std::optional<double> maybe_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const YAML::Node n = node_[key];
    if (!n.IsScalar()) throw InputError(where(key) + ": expected a number");
    const std::string text = n.Scalar();
    try {
      const double v = parse_double(text);
      if (!std::isfinite(v)) throw InputError("");
      return v;
    } catch (const InputError&) {
      throw InputError(where(key) + ": expected a finite number, got '" + text +
                       "' (values are plain numbers; the unit is part of the key name)");
    }
  }

  double number(const std::string& key, double fallback) {
    return maybe_number(key).value_or(fallback);
  }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw InputError(where(key) + ": must be > 0, got " + format_double(v));
    return v;
  }

  double non_negative(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v >= 0.0)) throw InputError(where(key) + ": must be >= 0, got " + format_double(v));
    return v;
  }

  int integer(const std::string& key, int fallback, int min_value) {
    if (!has(key)) return fallback;
    const double v = number(key, fallback);
    if (v != std::floor(v) || v < min_value || v > 1e8) {
      throw InputError(where(key) + ": expected an integer >= " + std::to_string(min_value));
    }
    return static_cast<int>(v);
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    try {
      return node_[key].as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      throw InputError(where(key) + ": expected a non-negative integer seed");
    }
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    try {
      return node_[key].as<bool>();
    } catch (const YAML::Exception&) {
      throw InputError(where(key) + ": expected true or false");
    }
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const YAML::Node n = node_[key];
    if (!n.IsScalar()) throw InputError(where(key) + ": expected a string");
    return n.Scalar();
  }

  std::string choice(const std::string& key, const std::string& fallback,
                     const std::set<std::string>& options) {
    const std::string v = text(key, fallback);
    if (options.count(v) == 0) {
      std::string list;
      for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
      throw InputError(where(key) + ": '" + v + "' is not one of " + list);
    }
    return v;
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    if (!has(key)) return out;
    const YAML::Node n = node_[key];
    if (n.IsScalar()) return {number(key, 0.0)};
    if (!n.IsSequence()) throw InputError(where(key) + ": expected a list of numbers");
    for (std::size_t i = 0; i < n.size(); ++i) {
      try {
        out.push_back(parse_double(n[i].Scalar()));
      } catch (const InputError&) {
        throw InputError(where(key) + "[" + std::to_string(i) + "]: expected a number");
      }
    }
    return out;
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (allowed_.count(key) != 0) continue;
      std::string hint;
      for (const auto& a : allowed_) {
        if (a.rfind(key + "_", 0) == 0) hint = " (did you mean '" + a + "'? keys carry their unit)";
      }
      throw InputError(where(key) + ": unknown key" + hint);
    }
  }

 private:
  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> allowed_;
};

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

QubitConfig parse_qubit(Section s) {
  QubitConfig q;
  q.kind = s.choice("kind", q.kind, {"transmon", "gatemon"});
  q.ec_mhz = s.positive("ec_mhz", q.ec_mhz);
  q.ej_mhz = s.non_negative("ej_mhz", q.ej_mhz);
  q.gap_mhz = s.non_negative("gap_mhz", q.gap_mhz);
  q.transmissions = s.numbers("transmissions");
  q.ng = s.number("ng", q.ng);
  q.basis = s.integer("basis", q.basis, 0);
  q.levels = s.integer("levels", q.levels, 3);
  q.infer_alpha_mhz = s.maybe_number("infer_alpha_mhz");
  q.alpha_table_points = s.integer("alpha_table_points", q.alpha_table_points, 0);
  s.finish();
  return q;
}

CavityConfig parse_cavity(Section s) {
  CavityConfig c;
  c.length_a_mm = s.positive("length_a_mm", c.length_a_mm);
  c.width_b_mm = s.positive("width_b_mm", c.width_b_mm);
  c.height_d_mm = s.positive("height_d_mm", c.height_d_mm);
  if (s.has("mode")) {
    const auto m = s.numbers("mode");
    if (m.size() != 3) throw InputError(s.path() + ".mode: expected [m, n, p]");
    for (int i = 0; i < 3; ++i) {
      if (m[i] < 0 || m[i] != std::floor(m[i])) {
        throw InputError(s.path() + ".mode: indices must be non-negative integers");
      }
      c.mode[i] = static_cast<int>(m[i]);
    }
  }
  c.g_mhz = s.maybe_number("g_mhz");
  c.f_q_mhz = s.maybe_number("f_q_mhz");
  c.alpha_mhz = s.maybe_number("alpha_mhz");
  c.chi_mhz = s.maybe_number("chi_mhz");
  c.delta_mhz = s.maybe_number("delta_mhz");
  s.finish();
  return c;
}

SweepConfig parse_sweep(Section s, const std::string& base_dir) {
  SweepConfig c;
  c.quantity = s.choice("quantity", c.quantity, {"ej", "transmission"});
  c.table = resolve(base_dir, s.text("table", ""));
  c.interpolation = s.choice("interpolation", c.interpolation, {"linear", "monotone_cubic"});
  if (s.has("nanowire")) {
    Section n = s.child("nanowire");
    NanowireProfile p;
    p.v_min = n.number("v_min_v", 0.0);
    p.v_max = n.number("v_max_v", 10.0);
    p.samples = n.integer("samples", 101, 2);
    p.v_pinch = n.number("v_pinch_v", 2.0);
    p.v_width = n.positive("v_width_v", 1.5);
    if (c.quantity == "ej") {
      p.max_value = n.positive("max_ej_mhz", 30000.0);
    } else {
      p.max_value = n.positive("max_transmission", 1.0);
      if (p.max_value > 1.0) throw InputError(n.path() + ".max_transmission: must be <= 1");
    }
    p.wiggle = n.non_negative("wiggle", 0.1);
    p.seed = n.seed("seed", 1);
    n.finish();
    c.nanowire = p;
  }
  c.v_start_v = s.number("v_start_v", c.v_start_v);
  c.v_stop_v = s.number("v_stop_v", c.v_stop_v);
  c.points = s.integer("points", c.points, 1);
  c.system.f_bare_ghz = s.positive("f_bare_ghz", c.system.f_bare_ghz);
  c.system.g_mhz = s.non_negative("g_mhz", c.system.g_mhz);
  c.system.ec_mhz = s.positive("ec_mhz", c.system.ec_mhz);
  c.system.gap_mhz = s.non_negative("gap_mhz", c.system.gap_mhz);
  c.system.ng = s.number("ng", c.system.ng);
  c.system.basis = s.integer("basis", c.system.basis, 0);
  s.finish();
  if (c.quantity == "transmission" && !(c.system.gap_mhz > 0.0)) {
    throw InputError(s.path() + ".gap_mhz: required (> 0) when quantity is transmission");
  }
  return c;
}

Axis axis(Section& s, const std::string& start, const std::string& stop, const std::string& n,
          Axis fallback) {
  Axis a{s.number(start, fallback.start), s.number(stop, fallback.stop),
         s.integer(n, fallback.points, 2)};
  validate(a, s.path().c_str());
  return a;
}

SynthConfig parse_synth(Section s, std::optional<std::uint64_t> top_seed) {
  const std::string kind = s.choice(
      "kind", "reflection_trace",
      {"reflection_trace", "lineshape", "rabi_trace", "power_map", "gate_map", "two_tone_map"});
  SynthConfig c = default_synth(kind);
  c.seed = s.seed("seed", top_seed.value_or(c.seed));
  if (s.has("snr_db")) {
    const auto& v = s.raw("snr_db");
    c.snr_db = (v.IsScalar() && (v.Scalar() == "inf" || v.Scalar() == "noiseless"))
                   ? kNoiseless
                   : s.number("snr_db", c.snr_db);
  }

  if (kind == "reflection_trace") {
    auto& r = *c.reflection;
    auto& t = r.truth;
    t.f_r_ghz = s.positive("f_r_ghz", t.f_r_ghz);
    t.qc = s.positive("qc", t.qc);
    if (s.has("qi") && s.has("ql")) throw InputError(s.path() + ": give either ql or qi, not both");
    if (s.has("qi")) {
      t.ql = loaded_q(s.positive("qi", 1.0), t.qc);
    } else {
      t.ql = s.positive("ql", t.ql);
    }
    t.theta = s.number("theta_rad", t.theta);
    if (!(std::abs(t.theta) < std::numbers::pi / 2)) {
      throw InputError(s.path() + ".theta_rad: must lie in (-pi/2, pi/2)");
    }
    t.a = {s.number("a_re", t.a.real()), s.number("a_im", t.a.imag())};
    t.delay_ns = s.number("delay_ns", t.delay_ns);
    const double half = s.positive("half_span_linewidths", 5.0);
    const int points = s.integer("points", r.freq_ghz.points, 2);
    r.freq_ghz = reflection_window(t, half, points);
    if (s.has("f_start_ghz") || s.has("f_stop_ghz")) {
      r.freq_ghz = axis(s, "f_start_ghz", "f_stop_ghz", "points", r.freq_ghz);
    }
  } else if (kind == "lineshape") {
    auto& l = *c.lineshape;
    l.truth.f0_ghz = s.positive("f0_ghz", l.truth.f0_ghz);
    l.truth.fwhm_ghz = s.positive("fwhm_mhz", l.truth.fwhm_ghz * 1e3) * 1e-3;
    l.truth.depth = s.positive("depth", l.truth.depth);
    l.truth.offset = s.positive("offset", l.truth.offset);
    if (!(l.truth.offset > l.truth.depth)) {
      throw InputError(s.path() + ": offset must exceed depth (magnitudes are written in dB)");
    }
    const double w = 5.0 * l.truth.fwhm_ghz;
    l.freq_ghz = axis(s, "f_start_ghz", "f_stop_ghz", "points",
                      Axis{l.truth.f0_ghz - w, l.truth.f0_ghz + w, l.freq_ghz.points});
  } else if (kind == "rabi_trace") {
    auto& r = *c.rabi;
    r.truth.amplitude = s.positive("amplitude", r.truth.amplitude);
    r.truth.t_r_ns = s.positive("t_r_ns", r.truth.t_r_ns);
    const double period = s.positive("period_ns", 2.0 * std::numbers::pi / r.truth.omega);
    r.truth.omega = 2.0 * std::numbers::pi / period;
    r.truth.phase = s.number("phase_rad", r.truth.phase);
    r.truth.slope = s.number("slope_per_ns", r.truth.slope);
    r.truth.offset = s.number("offset", r.truth.offset);
    r.t_ns = axis(s, "t_start_ns", "t_stop_ns", "points", r.t_ns);
  } else if (kind == "power_map") {
    auto& p = *c.power_map;
    p.system.f_bare_ghz = s.positive("f_bare_ghz", p.system.f_bare_ghz);
    p.system.g_mhz = s.positive("g_mhz", p.system.g_mhz);
    p.system.qubit.f01 = s.positive("f_q_mhz", p.system.qubit.f01);
    p.system.qubit.alpha = s.number("alpha_mhz", p.system.qubit.alpha);
    p.system.kappa_mhz = s.positive("kappa_mhz", p.system.kappa_mhz);
    p.system.gamma_q_mhz = s.non_negative("gamma_q_mhz", p.system.gamma_q_mhz);
    p.qc = s.positive("qc", p.qc);
    p.qi_intrinsic = s.positive("qi", p.qi_intrinsic);
    const Axis pw = axis(s, "power_start_dbm", "power_stop_dbm", "power_points",
                         Axis{p.powers_dbm.front(), p.powers_dbm.back(),
                              static_cast<int>(p.powers_dbm.size())});
    p.powers_dbm = pw.values();
    p.freq_ghz = axis(s, "f_start_ghz", "f_stop_ghz", "points", p.freq_ghz);
    p.power_model.line_attenuation_db = s.number("line_attenuation_db", 0.0);
    p.power_model.crossover_width = s.positive("crossover_width", 1.0);
  } else if (kind == "gate_map") {
    auto& g = *c.gate_map;
    g.qc = s.positive("qc", g.qc);
    g.qi = s.positive("qi", g.qi);
    g.gamma_q_mhz = s.non_negative("gamma_q_mhz", g.gamma_q_mhz);
    g.freq_ghz = axis(s, "f_start_ghz", "f_stop_ghz", "points", g.freq_ghz);
  } else {
    auto& t = *c.two_tone;
    t.alpha_mhz = s.number("alpha_mhz", t.alpha_mhz);
    t.fwhm_mhz = s.positive("fwhm_mhz", t.fwhm_mhz);
    t.depth = s.positive("depth", t.depth);
    t.baseline = s.number("baseline", t.baseline);
    t.two_photon = s.boolean("two_photon", t.two_photon);
    t.two_photon_depth_ratio = s.positive("two_photon_depth_ratio", t.two_photon_depth_ratio);
    t.background_amplitude = s.non_negative("background_amplitude", t.background_amplitude);
    t.background_period_ghz = s.positive("background_period_ghz", t.background_period_ghz);
    t.drive_ghz = axis(s, "drive_start_ghz", "drive_stop_ghz", "drive_points", t.drive_ghz);
  }
  s.finish();

  apply_seed_and_snr(c);
  return c;
}

std::vector<Tolerance> parse_tolerances(Section& s) {
  std::vector<Tolerance> out;
  const YAML::Node node = s.raw("compare");
  if (!node) return out;
  if (!node.IsMap()) throw InputError(s.path() + ".compare: expected quantity: {rel|abs: value}");
  for (const auto& kv : node) {
    const std::string q = kv.first.as<std::string>();
    Section t(kv.second, s.path() + ".compare." + q);
    Tolerance tol;
    tol.quantity = q;
    tol.truth = t.maybe_number("truth");
    const bool rel = t.has("rel"), abs = t.has("abs");
    if (rel == abs) throw InputError(t.path() + ": give exactly one of rel or abs");
    tol.relative = rel;
    tol.value = t.positive(rel ? "rel" : "abs", 1.0);
    t.finish();
    out.push_back(tol);
  }
  return out;
}

std::string default_fit(const std::string& synth_kind) {
  if (synth_kind == "reflection_trace") return "reflection";
  if (synth_kind == "lineshape") return "lorentzian";
  if (synth_kind == "rabi_trace") return "rabi";
  if (synth_kind == "two_tone_map") return "lorentzian_pair";
  return "";
}

PipelineConfig parse_pipeline(Section s, const std::string& base_dir,
                              std::optional<std::uint64_t> top_seed) {
  PipelineConfig p;
  const YAML::Node stages = s.raw("stages");
  s.finish();
  if (!stages || !stages.IsSequence() || stages.size() == 0) {
    throw InputError(s.path() + ".stages: expected a non-empty list");
  }
  for (std::size_t i = 0; i < stages.size(); ++i) {
    Section st(stages[i], s.path() + ".stages[" + std::to_string(i) + "]");
    PipelineStage stage;
    stage.name = st.text("name", "stage" + std::to_string(i + 1));
    if (st.has("synth")) stage.synth = parse_synth(st.child("synth"), top_seed);
    if (st.has("sweep_gate")) stage.sweep = parse_sweep(st.child("sweep_gate"), base_dir);
    stage.input = resolve(base_dir, st.text("input", ""));
    if (stage.synth.has_value() == !stage.input.empty()) {
      throw InputError(st.path() + ": give exactly one of synth or input");
    }
    stage.fit = st.choice("fit", stage.synth ? default_fit(stage.synth->kind) : "reflection",
                          {"reflection", "lorentzian", "lorentzian_pair", "rabi"});
    stage.fit_delay = st.boolean("delay", false);
    stage.tolerances = parse_tolerances(st);
    if (stage.tolerances.empty()) throw InputError(st.path() + ".compare: tolerance block required");
    if (!stage.input.empty()) {
      for (const auto& t : stage.tolerances) {
        if (!t.truth) {
          throw InputError(st.path() + ".compare." + t.quantity +
                           ".truth: required when the stage reads an input file");
        }
      }
    }
    st.finish();
    p.stages.push_back(std::move(stage));
  }
  return p;
}

RunConfig parse_root(const YAML::Node& root, const std::string& base_dir) {
  RunConfig c;
  if (!root || root.IsNull()) return c;
  Section s(root, "");
  if (s.has("seed")) c.seed = s.seed("seed", 0);
  c.output_dir = resolve(base_dir, s.text("output_dir", ""));
  if (s.has("simulate_qubit")) c.qubit = parse_qubit(s.child("simulate_qubit"));
  if (s.has("simulate_cavity")) c.cavity = parse_cavity(s.child("simulate_cavity"));
  if (s.has("sweep_gate")) c.sweep = parse_sweep(s.child("sweep_gate"), base_dir);
  if (s.has("synth")) c.synth = parse_synth(s.child("synth"), c.seed);
  if (s.has("fit")) {
    Section f = s.child("fit");
    c.fit_delay = f.boolean("delay", false);
    f.finish();
  }
  if (s.has("pipeline")) c.pipeline = parse_pipeline(s.child("pipeline"), base_dir, c.seed);
  s.finish();
  return c;
}

RunConfig parse_with_base(const std::string& text, const std::string& base_dir,
                          const std::string& label) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw InputError(label + ": line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  try {
    return parse_root(root, base_dir);
  } catch (const YAML::Exception& e) {
    throw InputError(label + ": " + e.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& yaml_text) {
  return parse_with_base(yaml_text, "", "config");
}

RunConfig load_config(const std::string& path) {
  const std::string text = read_text_file(path);
  const auto base = std::filesystem::path(path).parent_path().string();
  try {
    return parse_with_base(text, base, path);
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw InputError(path + ": " + msg);
  }
}

void apply_seed_and_snr(SynthConfig& c) {
  auto stamp = [&](auto& spec) {
    if (!spec) return;
    spec->seed = c.seed;
    spec->snr_db = c.snr_db;
  };
  stamp(c.reflection);
  stamp(c.lineshape);
  stamp(c.rabi);
  stamp(c.power_map);
  stamp(c.gate_map);
  stamp(c.two_tone);
}

SweepConfig default_sweep(const std::string& synth_kind) {
  SweepConfig s;
  if (synth_kind == "gate_map") {
    // Pinch-off ramp that carries f01 through the cavity near 3.4 V.
    NanowireProfile p;
    p.max_value = 30000.0;
    s.nanowire = p;
  } else {
    s.v_stop_v = 1.0;
    s.points = 11;
  }
  return s;
}

SynthConfig default_synth(const std::string& kind) {
  SynthConfig c;
  c.kind = kind;
  if (kind == "reflection_trace") {
    ReflectionSynthSpec r;
    r.truth.a = {0.8, 0.3};
    r.truth.ql = 6740.0;
    r.truth.qc = 7360.0;
    r.truth.f_r_ghz = 5.443;
    r.freq_ghz = reflection_window(r.truth, 5.0, 1601);
    c.reflection = r;
  } else if (kind == "lineshape") {
    LineshapeSynthSpec l;
    l.truth = LorentzianParams{4.5, 0.021, 0.3, 1.0};
    l.freq_ghz = Axis{4.4, 4.6, 201};
    c.snr_db = 20.0;
    c.lineshape = l;
  } else if (kind == "rabi_trace") {
    RabiSynthSpec r;
    r.truth = RabiParams{1.0, 260.0, 2.0 * std::numbers::pi / 60.0, 0.3, 2e-4, 0.5};
    r.t_ns = Axis{0.0, 1000.0, 201};
    c.snr_db = 20.0;
    c.rabi = r;
  } else if (kind == "power_map") {
    PowerMapSpec p;
    p.system.f_bare_ghz = 5.2816;
    p.system.g_mhz = 100.0;
    p.system.qubit.f01 = 5281.6 - 1000.0;
    p.system.kappa_mhz = 0.9;
    p.system.gamma_q_mhz = 44.0;
    p.qc = 7270.0;
    p.qi_intrinsic = 27000.0;
    p.powers_dbm = linspace(-160.0, -40.0, 41);
    p.freq_ghz = Axis{5.2716, 5.3016, 601};
    c.power_map = p;
  } else if (kind == "gate_map") {
    GateMapSpec g;
    g.qc = 7270.0;
    g.qi = 27000.0;
    g.gamma_q_mhz = 44.0;
    g.freq_ghz = Axis{5.13, 5.43, 601};
    c.gate_map = g;
  } else if (kind == "two_tone_map") {
    TwoToneSpec t;
    t.alpha_mhz = -172.0;
    t.fwhm_mhz = 21.0;
    t.depth = 1.0;
    t.two_photon = true;
    t.drive_ghz = Axis{3.0, 4.8, 1801};
    c.snr_db = kNoiseless;
    c.two_tone = t;
  } else {
    throw InputError("unknown synth kind '" + kind + "'");
  }
  apply_seed_and_snr(c);
  return c;
}

PipelineConfig default_pipeline() {
  PipelineConfig p;
  auto stage = [&](std::string name, SynthConfig s, std::string fit,
                   std::vector<Tolerance> tol) {
    PipelineStage st;
    st.name = std::move(name);
    st.synth = std::move(s);
    st.fit = std::move(fit);
    st.tolerances = std::move(tol);
    p.stages.push_back(std::move(st));
  };
  auto seeded = [](SynthConfig c, std::uint64_t seed) {
    c.seed = seed;
    apply_seed_and_snr(c);
    return c;
  };

  stage("resonator_80k", seeded(default_synth("reflection_trace"), 1), "reflection",
        {{"ql", std::nullopt, 0.02, true},
         {"qc", std::nullopt, 0.02, true},
         {"f_r_ghz", std::nullopt, 0.02, true},
         {"qi", 80000.0, 5000.0, false}});

  SynthConfig device_a = default_synth("reflection_trace");
  auto& t = device_a.reflection->truth;
  t.a = {1.0, 0.0};
  t.qc = 7270.0;
  t.ql = loaded_q(27000.0, 7270.0);
  t.f_r_ghz = 5.2816;
  device_a.reflection->freq_ghz = reflection_window(t, 5.0, 1601);
  device_a.snr_db = 40.0;
  stage("device_a", seeded(device_a, 2), "reflection", {{"qi", 27000.0, 1000.0, false}});

  stage("qubit_line", seeded(default_synth("lineshape"), 3), "lorentzian",
        {{"fwhm_mhz", std::nullopt, 0.10, true}});
  stage("rabi", seeded(default_synth("rabi_trace"), 4), "rabi",
        {{"t_r_ns", std::nullopt, 60.0, false}});
  stage("two_tone", seeded(default_synth("two_tone_map"), 5), "lorentzian_pair",
        {{"separation_mhz", std::nullopt, 1e-6, false}});
  p.stages.back().sweep = default_sweep("two_tone_map");
  return p;
}

GateSweepModel sweep_model(const SweepConfig& c) {
  const auto quantity =
      c.quantity == "ej" ? SweepQuantity::JosephsonEnergy : SweepQuantity::Transmission;
  const auto interp =
      c.interpolation == "linear" ? Interpolation::Linear : Interpolation::MonotoneCubic;
  if (!c.table.empty()) {
    const CsvTable t = read_csv_file(c.table);
    const std::string expect = c.quantity == "ej" ? "EJ_MHz" : "T";
    if (t.header.size() != 2 || t.header[0] != "V_G" || t.header[1] != expect) {
      throw InputError(c.table + ": line 1: expected header 'V_G," + expect + "'");
    }
    std::vector<double> v, y;
    for (const auto& r : t.rows) {
      v.push_back(r[0]);
      y.push_back(r[1]);
    }
    return GateSweepModel(std::move(v), std::move(y), quantity, interp);
  }
  if (c.nanowire) return nanowire_profile(*c.nanowire, quantity);
  // Built-in dispersive ramp: EJ from 9 to 13 GHz across the sweep window.
  if (quantity != SweepQuantity::JosephsonEnergy) {
    throw InputError("sweep_gate: a transmission sweep needs a table or a nanowire profile");
  }
  return GateSweepModel({c.v_start_v, c.v_stop_v}, {9000.0, 13000.0}, quantity,
                        Interpolation::Linear);
}

std::vector<double> sweep_points(const SweepConfig& c) {
  if (c.points == 1) return {c.v_start_v};
  return linspace(c.v_start_v, c.v_stop_v, c.points);
}

}  // namespace cqed::cli
