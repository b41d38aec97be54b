#include "cqed_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cqed/background.hpp"
#include "cqed/coupling.hpp"
#include "cqed/error.hpp"
#include "cqed/io.hpp"
#include "cqed/lineshape.hpp"
#include "cqed/plot.hpp"
#include "cqed/rabi.hpp"
#include "cqed/resonator.hpp"
#include "cqed/spectra.hpp"
#include "cqed/synth.hpp"
#include "cqed/textio.hpp"

namespace cqed::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string config;
  std::string out_dir;
  std::string out;
  bool plot = false;
  bool quiet = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "YAML run configuration");
  sub->add_option("--out-dir", c.out_dir,
                  std::string("directory for CSV/SVG outputs (default: $") + kOutDirEnv + " or .)");
  sub->add_option("-o,--out", c.out, "write the JSON result here instead of stdout");
  sub->add_flag("--plot", c.plot, "also write an SVG rendering");
  sub->add_flag("-q,--quiet", c.quiet, "do not print JSON to stdout");
}

RunConfig load(const Common& c) { return c.config.empty() ? RunConfig{} : load_config(c.config); }

std::string output_dir(const Common& c, const RunConfig& cfg) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return ".";
}

std::string output_path(const std::string& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
  return (fs::path(dir) / name).string();
}

void emit(const json& j, const Common& c, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (!c.out.empty()) {
    const auto parent = fs::path(c.out).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    write_text_file(c.out, text);
  } else if (!c.quiet) {
    out << text;
  }
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

double parse_snr(const std::string& text) {
  if (text == "inf" || text == "noiseless") return kNoiseless;
  const double v = parse_double(text);
  if (std::isnan(v)) throw InputError("--snr-db: expected a number or 'inf'");
  return v;
}

std::string csv(const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::string s = header + "\n";
  for (const auto& r : rows) s += join_csv_row(r) + "\n";
  return s;
}

// Prefixes reader errors with the file name.
template <class F>
auto read_input(const std::string& path, F&& reader) {
  try {
    return reader(path);
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.find(path) != std::string::npos) throw;
    throw InputError(path + ": " + msg);
  }
}

// ---- fitting ----------------------------------------------------------

struct FitOutput {
  json result;
  bool converged = false;
  std::string residual_csv;
  std::vector<Series> plot;
  std::string x_label;
  std::string y_label;
};

FitOutput fit_resonator_trace(const ComplexTrace& trace, bool delay) {
  ReflectionFitOptions opts;
  opts.fit_delay = delay;
  const ResonatorFit fit = fit_reflection(trace, std::nullopt, opts);
  FitOutput o;
  o.result = to_json(fit);
  o.converged = fit.converged();
  const auto res = reflection_residuals(trace, fit.params);
  std::vector<std::vector<double>> rows;
  Series data{"data", trace.freqs_ghz, {}}, model{"fit", trace.freqs_ghz, {}};
  for (std::size_t i = 0; i < trace.freqs_ghz.size(); ++i) {
    rows.push_back({trace.freqs_ghz[i], res[i].real(), res[i].imag()});
    data.y.push_back(std::abs(trace.values[i]));
    model.y.push_back(std::abs(reflection_model(fit.params, trace.freqs_ghz[i])));
  }
  o.residual_csv = csv("freq_ghz,re,im", rows);
  o.plot = {data, model};
  o.x_label = "frequency (GHz)";
  o.y_label = "|S|";
  return o;
}

FitOutput fit_lineshape_trace(const Samples& s, bool pair) {
  FitOutput o;
  Series data{"data", s.x, s.y}, model{"fit", s.x, {}};
  std::vector<std::vector<double>> rows;
  std::function<double(double)> f;
  if (pair) {
    const auto fit = fit_lorentzian_pair(s);
    o.result = to_json(fit);
    o.converged = fit.fit.converged;
    const auto lo = fit.low, hi = fit.high;
    f = [lo, hi](double x) { return lorentzian_dip(lo, x) + lorentzian_dip(hi, x) - lo.offset; };
  } else {
    const auto fit = fit_lorentzian(s);
    o.result = to_json(fit);
    o.converged = fit.fit.converged;
    const auto p = fit.params;
    f = [p](double x) { return lorentzian_dip(p, x); };
  }
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    model.y.push_back(f(s.x[i]));
    rows.push_back({s.x[i], s.y[i] - model.y.back()});
  }
  o.residual_csv = csv("freq_ghz,residual", rows);
  o.plot = {data, model};
  o.x_label = "frequency (GHz)";
  o.y_label = "|S|";
  return o;
}

FitOutput fit_rabi_trace(const Samples& s) {
  const auto fit = fit_rabi(s);
  FitOutput o;
  o.result = to_json(fit);
  o.converged = fit.fit.converged;
  Series data{"data", s.x, s.y}, model{"fit", s.x, {}};
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    model.y.push_back(rabi_model(fit.params, s.x[i]));
    rows.push_back({s.x[i], s.y[i] - model.y.back()});
  }
  o.residual_csv = csv("t_ns,residual", rows);
  o.plot = {data, model};
  o.x_label = "time (ns)";
  o.y_label = "signal";
  return o;
}

int finish_fit(FitOutput o, const std::string& input, const std::string& residuals,
               const Common& c, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string dir = output_dir(c, cfg);
  const std::string stem = stem_of(input);
  const std::string res_path =
      residuals.empty() ? output_path(dir, stem + ".residuals.csv") : residuals;
  write_text_file(res_path, o.residual_csv);
  o.result["input"] = input;
  o.result["residuals"] = res_path;
  if (c.plot) {
    const std::string svg = output_path(dir, stem + ".svg");
    write_text_file(svg, line_plot_svg(o.plot, o.x_label, o.y_label, stem));
    o.result["plot"] = svg;
  }
  emit(o.result, c, out);
  if (!o.converged) {
    err << "error: fit did not converge: " << o.result.value("message", "") << "\n";
    return kExitNoFit;
  }
  return kExitOk;
}

// ---- simulation -------------------------------------------------------

json simulate_qubit(const QubitConfig& q, const std::string& dir, bool plot, const std::string& title) {
  SolverOptions opts;
  opts.basis = q.basis;
  opts.keep_levels = q.levels;
  json j = {{"kind", "qubit_spectrum"}, {"model", q.kind}};
  QubitSpectrum spectrum;
  std::vector<Series> series;
  if (q.kind == "transmon") {
    if (q.infer_alpha_mhz || q.alpha_table_points > 0 || !q.transmissions.empty()) {
      throw InputError("simulate_qubit: transmissions, infer_alpha_mhz and alpha_table_points "
                       "apply to the gatemon only");
    }
    if (!(q.ej_mhz > 0.0)) throw InputError("simulate_qubit.ej_mhz: required (> 0) for a transmon");
    const TransmonParams p{q.ec_mhz, q.ej_mhz, q.ng};
    spectrum = transmon_levels(p, opts);
    j["params"] = {{"ec_mhz", p.ec_mhz}, {"ej_mhz", p.ej_mhz}, {"ng", p.ng}};
  } else {
    if (!(q.gap_mhz > 0.0)) throw InputError("simulate_qubit.gap_mhz: required (> 0) for a gatemon");
    if (q.ej_mhz != 0.0) throw InputError("simulate_qubit.ej_mhz: not used by the gatemon model");
    std::vector<double> ts = q.transmissions;
    const int grid = q.basis > 0 ? q.basis : kDefaultPhaseGrid;
    if (q.infer_alpha_mhz) {
      const auto est = infer_transmission(*q.infer_alpha_mhz, q.ec_mhz, q.gap_mhz, grid);
      j["inferred"] = {{"target_alpha_mhz", *q.infer_alpha_mhz},
                       {"transmission", est.transmission},
                       {"alpha_mhz", est.alpha_mhz}};
      if (ts.empty()) ts = {est.transmission};
    }
    if (ts.empty()) {
      throw InputError("simulate_qubit.transmissions: required unless infer_alpha_mhz is given");
    }
    const GatemonParams p{q.ec_mhz, q.gap_mhz, ts, q.ng};
    spectrum = gatemon_levels(p, opts);
    j["params"] = {{"ec_mhz", p.ec_mhz}, {"gap_mhz", p.gap_mhz}, {"transmissions", ts},
                   {"ng", p.ng}};
    if (q.alpha_table_points == 1) throw InputError("simulate_qubit.alpha_table_points: need >= 2");
    if (q.alpha_table_points >= 2) {
      json table = json::array();
      std::vector<std::vector<double>> rows;
      Series s{"alpha", {}, {}};
      for (double t : linspace(0.0, 1.0, q.alpha_table_points)) {
        const auto sp = gatemon_levels(GatemonParams{q.ec_mhz, q.gap_mhz, {t}, q.ng}, opts);
        table.push_back({{"transmission", t}, {"alpha_mhz", sp.alpha}, {"f01_mhz", sp.f01}});
        rows.push_back({t, sp.alpha, sp.f01});
        s.x.push_back(t);
        s.y.push_back(sp.alpha);
      }
      j["alpha_table"] = table;
      const std::string path = output_path(dir, title + ".alpha_table.csv");
      write_text_file(path, csv("T,alpha_mhz,f01_mhz", rows));
      j["files"]["alpha_table"] = path;
      series.push_back(s);
    }
  }
  j["spectrum"] = to_json(spectrum);
  std::vector<std::vector<double>> rows;
  Series lv{"levels", {}, {}};
  for (std::size_t k = 0; k < spectrum.levels.size(); ++k) {
    rows.push_back({static_cast<double>(k), spectrum.levels[k]});
    lv.x.push_back(static_cast<double>(k));
    lv.y.push_back(spectrum.levels[k]);
  }
  const std::string path = output_path(dir, title + ".csv");
  write_text_file(path, csv("level,energy_mhz", rows));
  j["files"]["levels"] = path;
  if (plot) {
    const std::string svg = output_path(dir, title + ".svg");
    if (series.empty()) {
      write_text_file(svg, line_plot_svg({lv}, "level", "E_k - E_0 (MHz)", q.kind + " levels"));
    } else {
      write_text_file(svg, line_plot_svg(series, "T", "alpha (MHz)", "gatemon anharmonicity"));
    }
    j["files"]["plot"] = svg;
  }
  return j;
}

json simulate_cavity(const CavityConfig& c) {
  const CavityGeometry g{c.length_a_mm * 1e-3, c.width_b_mm * 1e-3, c.height_d_mm * 1e-3, c.mode};
  const double f_c = te_mode_frequency(g);
  json j = {{"kind", "cavity"},
            {"geometry", {{"length_a_mm", c.length_a_mm}, {"width_b_mm", c.width_b_mm},
                          {"height_d_mm", c.height_d_mm}}},
            {"mode", c.mode},
            {"f_ghz", f_c}};
  if (c.g_mhz.has_value() != c.f_q_mhz.has_value()) {
    throw InputError("simulate_cavity: g_mhz and f_q_mhz go together");
  }
  if (c.g_mhz) {
    Warnings w;
    const double delta = f_c * 1e3 - *c.f_q_mhz;
    const auto b = anti_crossing(f_c, *c.f_q_mhz * 1e-3, *c.g_mhz);
    json cp = {{"g_mhz", *c.g_mhz},
               {"f_q_mhz", *c.f_q_mhz},
               {"delta_mhz", delta},
               {"regime", std::abs(delta) > kDispersiveRatio * *c.g_mhz ? "dispersive" : "resonant"},
               {"f_plus_ghz", b.f_plus_ghz},
               {"f_minus_ghz", b.f_minus_ghz}};
    if (delta != 0.0) {
      cp["chi_two_level_mhz"] = dispersive_shift_two_level(*c.g_mhz, delta, &w);
      cp["n_crit"] = critical_photon_number(*c.g_mhz, delta);
      if (c.alpha_mhz) {
        cp["alpha_mhz"] = *c.alpha_mhz;
        cp["chi_transmon_mhz"] = dispersive_shift_transmon(*c.g_mhz, delta, *c.alpha_mhz);
      }
    }
    cp["warnings"] = w;
    j["coupling"] = cp;
  } else if (c.alpha_mhz) {
    throw InputError("simulate_cavity.alpha_mhz: needs g_mhz and f_q_mhz");
  }
  if (c.chi_mhz.has_value() != c.delta_mhz.has_value()) {
    throw InputError("simulate_cavity: chi_mhz and delta_mhz go together");
  }
  if (c.chi_mhz) {
    j["coupling_estimate"] = {{"chi_mhz", *c.chi_mhz},
                              {"delta_mhz", *c.delta_mhz},
                              {"g_mhz", coupling_from_shift(*c.chi_mhz, *c.delta_mhz)}};
  }
  return j;
}

json sweep_system_json(const SweepConfig& s) {
  return {{"quantity", s.quantity},       {"interpolation", s.interpolation},
          {"f_bare_ghz", s.system.f_bare_ghz}, {"g_mhz", s.system.g_mhz},
          {"ec_mhz", s.system.ec_mhz},    {"gap_mhz", s.system.gap_mhz},
          {"ng", s.system.ng}};
}

SweepResult run_sweep(const SweepConfig& s) {
  if (s.quantity == "transmission" && !(s.system.gap_mhz > 0.0)) {
    throw InputError("sweep_gate: gap_mhz is required for a transmission sweep");
  }
  return gate_sweep(sweep_model(s), sweep_points(s), s.system);
}

// ---- synthesis --------------------------------------------------------

struct Dataset {
  std::string csv;
  json truth;
  std::optional<ComplexTrace> trace;
  std::optional<Samples> samples;
  std::optional<Grid2D> grid;
};

Dataset synthesize(const SynthConfig& c, const std::optional<SweepConfig>& sweep_cfg) {
  Dataset d;
  if (c.reflection) {
    d.trace = synth_reflection(*c.reflection);
    d.csv = reflection_csv(*d.trace);
    d.truth = truth_json(*c.reflection);
  } else if (c.lineshape) {
    d.samples = synth_lineshape(*c.lineshape);
    d.csv = magnitude_db_csv(*d.samples);
    d.truth = truth_json(*c.lineshape);
  } else if (c.rabi) {
    d.samples = synth_rabi(*c.rabi);
    d.csv = timeseries_csv(*d.samples);
    d.truth = truth_json(*c.rabi);
  } else if (c.power_map) {
    d.grid = synth_power_map(*c.power_map);
    d.csv = grid_csv(*d.grid);
    d.truth = truth_json(*c.power_map);
  } else {
    const SweepConfig s = sweep_cfg.value_or(default_sweep(c.kind));
    const SweepResult sweep = run_sweep(s);
    if (c.gate_map) {
      GateMapSpec spec = *c.gate_map;
      spec.f_bare_ghz = s.system.f_bare_ghz;
      spec.g_mhz = s.system.g_mhz;
      d.grid = synth_gate_map(spec, sweep);
      d.truth = truth_json(spec, sweep);
    } else {
      d.grid = synth_two_tone(*c.two_tone, sweep);
      d.truth = truth_json(*c.two_tone, sweep);
      if (c.two_tone->two_photon) {
        d.truth["truth"]["separation_mhz"] = std::abs(c.two_tone->alpha_mhz) / 2.0;
      }
    }
    d.truth["sweep_system"] = sweep_system_json(s);
    d.csv = grid_csv(*d.grid);
  }
  d.truth["dataset"] = c.kind;
  return d;
}

std::string dataset_svg(const Dataset& d, const std::string& title) {
  if (d.grid) return heatmap_svg(*d.grid, title);
  if (d.trace) {
    Series s{"|S|", d.trace->freqs_ghz, {}};
    for (const auto& v : d.trace->values) s.y.push_back(std::abs(v));
    return line_plot_svg({s}, "frequency (GHz)", "|S|", title);
  }
  const bool rabi = d.truth.value("kind", "") == "rabi_trace";
  return line_plot_svg({Series{"data", d.samples->x, d.samples->y}},
                       rabi ? "time (ns)" : "frequency (GHz)", rabi ? "signal" : "|S|", title);
}

// ---- pipeline ---------------------------------------------------------

std::vector<json> fit_for_pipeline(const std::string& kind, bool delay, const Dataset& d) {
  std::vector<json> fits;
  auto flat = [](const json& fit) {
    json q = fit.contains("params") ? fit["params"] : json::object();
    if (fit.value("kind", "") == "lorentzian_pair") {
      q["separation_mhz"] = fit["separation_mhz"];
      q["low_f0_ghz"] = fit["low"]["f0_ghz"];
      q["high_f0_ghz"] = fit["high"]["f0_ghz"];
    }
    q["converged"] = fit["converged"];
    q["message"] = fit["message"];
    return q;
  };
  if (kind == "reflection") {
    if (!d.trace) throw InputError("reflection fit needs a complex reflection trace");
    fits.push_back(flat(fit_resonator_trace(*d.trace, delay).result));
  } else if (kind == "rabi") {
    if (!d.samples) throw InputError("Rabi fit needs a t_ns,y time series");
    fits.push_back(flat(fit_rabi_trace(*d.samples).result));
  } else {
    const bool pair = kind == "lorentzian_pair";
    if (d.grid) {
      for (Eigen::Index r = 0; r < d.grid->values.rows(); ++r) {
        fits.push_back(flat(fit_lineshape_trace(row(*d.grid, r), pair).result));
      }
    } else if (d.samples) {
      fits.push_back(flat(fit_lineshape_trace(*d.samples, pair).result));
    } else {
      throw InputError("Lorentzian fit needs a magnitude spectrum or a map");
    }
  }
  return fits;
}

Dataset load_input(const std::string& path, const std::string& fit) {
  Dataset d;
  if (fit == "reflection") {
    d.trace = read_input(path, [](const std::string& p) { return read_reflection_csv(p); });
  } else if (fit == "rabi") {
    d.samples = read_input(path, [](const std::string& p) { return read_timeseries_csv(p); });
  } else {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);
    if (header.find('/') != std::string::npos) {
      d.grid = read_input(path, [](const std::string& p) { return read_grid_csv(p); });
    } else {
      d.samples = read_input(path, [](const std::string& p) { return read_magnitude_db_csv(p); });
    }
  }
  return d;
}

}  // namespace

StageOutcome run_stage(const PipelineStage& stage, double rel_tol_override) {
  auto label = [&](const char* step) {
    return "stage '" + stage.name + "' (" + step + "): ";
  };
  json rep = {{"name", stage.name}, {"fit", stage.fit}};
  Dataset d;
  try {
    if (stage.synth) {
      rep["source"] = "synth:" + stage.synth->kind;
      d = synthesize(*stage.synth, stage.sweep);
    } else {
      rep["source"] = stage.input;
      d = load_input(stage.input, stage.fit);
    }
  } catch (const Error& e) {
    throw InputError(label(stage.synth ? "synth" : "input") + e.what());
  }

  std::vector<json> fits;
  try {
    fits = fit_for_pipeline(stage.fit, stage.fit_delay, d);
  } catch (const ConvergenceError& e) {
    rep["status"] = "error";
    rep["message"] = label("fit") + e.what();
    rep["quantities"] = json::array();
    return {rep, false};
  } catch (const InputError& e) {
    throw InputError(label("fit") + e.what());
  }

  bool converged = true;
  for (const auto& f : fits) converged = converged && f.value("converged", false);
  rep["traces"] = fits.size();
  rep["converged"] = converged;

  bool all = converged;
  json quantities = json::array();
  const json truth = d.truth.contains("truth") ? d.truth["truth"] : json::object();
  for (const auto& tol : stage.tolerances) {
    double t = 0.0;
    if (tol.truth) {
      t = *tol.truth;
    } else if (truth.contains(tol.quantity) && truth[tol.quantity].is_number()) {
      t = truth[tol.quantity].get<double>();
    } else {
      throw InputError(label("compare") + "no truth value for '" + tol.quantity + "'");
    }
    // Worst case over all fitted traces.
    double fitted = 0.0, worst = -1.0;
    for (const auto& f : fits) {
      if (!f.contains(tol.quantity)) {
        throw InputError(label("compare") + "fit '" + stage.fit + "' has no quantity '" +
                         tol.quantity + "'");
      }
      const double v = f[tol.quantity].is_number() ? f[tol.quantity].get<double>() : NAN;
      const double dev = std::isfinite(v) ? std::abs(v - t) : INFINITY;
      if (dev > worst) {
        worst = dev;
        fitted = v;
      }
    }
    const bool relative = rel_tol_override > 0.0 ? true : tol.relative;
    const double value = rel_tol_override > 0.0 ? rel_tol_override : tol.value;
    const double allowed = relative ? value * std::abs(t) : value;
    const bool pass = worst <= allowed;
    all = all && pass;
    quantities.push_back({{"name", tol.quantity},
                          {"truth", t},
                          {"fitted", std::isfinite(fitted) ? json(fitted) : json(nullptr)},
                          {"error", std::isfinite(worst) ? json(worst) : json(nullptr)},
                          {"tolerance", value},
                          {"mode", relative ? "rel" : "abs"},
                          {"pass", pass}});
  }
  rep["quantities"] = quantities;
  rep["status"] = all ? "pass" : "fail";
  if (!converged) rep["message"] = label("fit") + "fit did not converge";
  return {rep, all};
}

json run_pipeline(const PipelineConfig& config, double rel_tol_override) {
  json stages = json::array();
  bool all = true;
  int passed = 0;
  for (const auto& st : config.stages) {
    auto outcome = run_stage(st, rel_tol_override);
    all = all && outcome.passed;
    passed += outcome.passed ? 1 : 0;
    stages.push_back(std::move(outcome.report));
  }
  return {{"kind", "pipeline_report"},
          {"passed", all},
          {"summary", {{"stages", config.stages.size()}, {"passed", passed}}},
          {"stages", stages}};
}

namespace {

void print_table(const json& report, std::ostream& err) {
  for (const auto& st : report["stages"]) {
    err << std::left << std::setw(20) << st["name"].get<std::string>() << " "
        << st["status"].get<std::string>() << "\n";
    for (const auto& q : st["quantities"]) {
      err << "    " << std::setw(16) << q["name"].get<std::string>()
          << (q["pass"].get<bool>() ? "PASS" : "FAIL") << "  truth=" << q["truth"].dump()
          << " fitted=" << q["fitted"].dump() << " error=" << q["error"].dump() << " "
          << q["mode"].get<std::string>() << "_tol=" << q["tolerance"].dump() << "\n";
    }
    if (st.contains("message")) err << "    " << st["message"].get<std::string>() << "\n";
  }
}

int dispatch(CLI::App& app, std::ostream& out, std::ostream& err, const std::vector<std::string>& args) {
  Common common;

  // fit-resonator
  std::string fr_input, fr_residuals;
  bool fr_delay = false;
  auto* fr = app.add_subcommand("fit-resonator", "fit a complex reflection trace (freq_ghz,re,im)");
  fr->add_option("input", fr_input, "trace CSV")->required();
  auto* fr_delay_opt =
      fr->add_flag("--delay,!--no-delay", fr_delay, "fit the cable delay as a free parameter");
  fr->add_option("--residuals", fr_residuals, "residual CSV path (default: <out-dir>/<stem>.residuals.csv)");
  add_common(fr, common);

  // fit-lorentzian
  std::string fl_input, fl_residuals;
  bool fl_pair = false;
  auto* fl = app.add_subcommand("fit-lorentzian", "fit a Lorentzian dip (freq_ghz,mag_db)");
  fl->add_option("input", fl_input, "spectrum CSV")->required();
  fl->add_flag("--pair", fl_pair, "fit two dips on a shared offset");
  fl->add_option("--residuals", fl_residuals, "residual CSV path");
  add_common(fl, common);

  // fit-rabi
  std::string rb_input, rb_residuals;
  auto* rb = app.add_subcommand("fit-rabi", "fit a damped Rabi oscillation (t_ns,y)");
  rb->add_option("input", rb_input, "time-series CSV")->required();
  rb->add_option("--residuals", rb_residuals, "residual CSV path");
  add_common(rb, common);

  // simulate-qubit
  QubitConfig qf;
  std::optional<double> q_alpha;
  auto* sq = app.add_subcommand("simulate-qubit", "transmon or gatemon level spectrum");
  auto* sq_kind = sq->add_option("--kind", qf.kind, "transmon | gatemon")
                      ->check(CLI::IsMember({"transmon", "gatemon"}));
  auto* sq_ec = sq->add_option("--ec-mhz", qf.ec_mhz, "charging energy E_C/h");
  auto* sq_ej = sq->add_option("--ej-mhz", qf.ej_mhz, "Josephson energy E_J/h (transmon)");
  auto* sq_gap = sq->add_option("--gap-mhz", qf.gap_mhz, "superconducting gap/h (gatemon)");
  auto* sq_t = sq->add_option("--transmission", qf.transmissions, "channel transmissions (gatemon)")
                   ->delimiter(',');
  auto* sq_ng = sq->add_option("--ng", qf.ng, "offset charge");
  auto* sq_basis = sq->add_option("--basis", qf.basis, "charge cutoff or phase grid size");
  auto* sq_levels = sq->add_option("--levels", qf.levels, "levels to report");
  auto* sq_infer = sq->add_option("--infer-alpha-mhz", q_alpha, "invert alpha(T) for a single channel");
  auto* sq_table = sq->add_option("--alpha-table", qf.alpha_table_points, "tabulate alpha(T) on N points");
  add_common(sq, common);

  // simulate-cavity
  CavityConfig cf;
  std::vector<int> mode;
  std::optional<double> c_g, c_fq, c_alpha, c_chi, c_delta;
  auto* sc = app.add_subcommand("simulate-cavity", "rectangular cavity TE mode and dispersive coupling");
  auto* sc_a = sc->add_option("--a-mm", cf.length_a_mm, "cavity length a");
  auto* sc_b = sc->add_option("--b-mm", cf.width_b_mm, "cavity width b");
  auto* sc_d = sc->add_option("--d-mm", cf.height_d_mm, "cavity height d");
  auto* sc_mode = sc->add_option("--mode", mode, "TE mode indices m,n,p")->delimiter(',')->expected(3);
  sc->add_option("--g-mhz", c_g, "qubit-cavity coupling g/2pi");
  sc->add_option("--f-q-mhz", c_fq, "qubit frequency");
  sc->add_option("--alpha-mhz", c_alpha, "qubit anharmonicity for the transmon shift");
  sc->add_option("--chi-mhz", c_chi, "measured dispersive shift (estimate g)");
  sc->add_option("--delta-mhz", c_delta, "detuning for the g estimate");
  add_common(sc, common);

  // sweep-gate
  SweepConfig sf;
  auto* sg = app.add_subcommand("sweep-gate", "qubit and cavity frequencies versus gate voltage");
  auto* sg_table = sg->add_option("--table", sf.table, "CSV with V_G,EJ_MHz or V_G,T");
  auto* sg_q = sg->add_option("--quantity", sf.quantity, "ej | transmission")
                   ->check(CLI::IsMember({"ej", "transmission"}));
  auto* sg_interp = sg->add_option("--interpolation", sf.interpolation, "linear | monotone_cubic")
                        ->check(CLI::IsMember({"linear", "monotone_cubic"}));
  auto* sg_v0 = sg->add_option("--v-start", sf.v_start_v, "first gate voltage (V)");
  auto* sg_v1 = sg->add_option("--v-stop", sf.v_stop_v, "last gate voltage (V)");
  auto* sg_n = sg->add_option("--points", sf.points, "number of gate points");
  auto* sg_fb = sg->add_option("--f-bare-ghz", sf.system.f_bare_ghz, "bare cavity frequency");
  auto* sg_g = sg->add_option("--g-mhz", sf.system.g_mhz, "coupling g/2pi");
  auto* sg_ec = sg->add_option("--ec-mhz", sf.system.ec_mhz, "charging energy");
  auto* sg_gap = sg->add_option("--gap-mhz", sf.system.gap_mhz, "gap (transmission sweeps)");
  add_common(sg, common);

  // synth
  std::string sy_kind, sy_snr, sy_name;
  std::uint64_t sy_seed = 0;
  auto* sy = app.add_subcommand("synth", "write a seeded synthetic dataset and its truth JSON");
  auto* sy_kind_opt =
      sy->add_option("--kind", sy_kind, "reflection_trace | lineshape | rabi_trace | power_map | "
                                         "gate_map | two_tone_map")
          ->check(CLI::IsMember({"reflection_trace", "lineshape", "rabi_trace", "power_map",
                                 "gate_map", "two_tone_map"}));
  auto* sy_seed_opt = sy->add_option("--seed", sy_seed, "noise seed");
  auto* sy_snr_opt = sy->add_option("--snr-db", sy_snr, "signal-to-noise ratio in dB or 'inf'");
  sy->add_option("--name", sy_name, "output file stem (default: the kind)");
  add_common(sy, common);

  // pipeline
  double pl_rel = 0.0;
  auto* pl = app.add_subcommand("pipeline", "synth -> fit -> compare against truth");
  pl->add_option("--rel-tol", pl_rel, "replace every tolerance by this relative tolerance")
      ->check(CLI::PositiveNumber);
  add_common(pl, common);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  const RunConfig cfg = load(common);
  const std::string dir = output_dir(common, cfg);

  if (fr->parsed()) {
    const bool delay = fr_delay_opt->count() > 0 ? fr_delay : cfg.fit_delay;
    auto o = fit_resonator_trace(
        read_input(fr_input, [](const std::string& p) { return read_reflection_csv(p); }), delay);
    return finish_fit(std::move(o), fr_input, fr_residuals, common, cfg, out, err);
  }
  if (fl->parsed()) {
    auto o = fit_lineshape_trace(
        read_input(fl_input, [](const std::string& p) { return read_magnitude_db_csv(p); }), fl_pair);
    return finish_fit(std::move(o), fl_input, fl_residuals, common, cfg, out, err);
  }
  if (rb->parsed()) {
    auto o = fit_rabi_trace(
        read_input(rb_input, [](const std::string& p) { return read_timeseries_csv(p); }));
    return finish_fit(std::move(o), rb_input, rb_residuals, common, cfg, out, err);
  }
  if (sq->parsed()) {
    QubitConfig q = cfg.qubit.value_or(QubitConfig{});
    if (sq_kind->count()) q.kind = qf.kind;
    if (sq_ec->count()) q.ec_mhz = qf.ec_mhz;
    if (sq_ej->count()) q.ej_mhz = qf.ej_mhz;
    if (sq_gap->count()) q.gap_mhz = qf.gap_mhz;
    if (sq_t->count()) q.transmissions = qf.transmissions;
    if (sq_ng->count()) q.ng = qf.ng;
    if (sq_basis->count()) q.basis = qf.basis;
    if (sq_levels->count()) q.levels = qf.levels;
    if (sq_infer->count()) q.infer_alpha_mhz = q_alpha;
    if (sq_table->count()) q.alpha_table_points = qf.alpha_table_points;
    if (!(q.ec_mhz > 0.0)) throw InputError("--ec-mhz: must be > 0");
    if (q.levels < 3) throw InputError("--levels: need at least 3");
    emit(simulate_qubit(q, dir, common.plot, "spectrum"), common, out);
    return kExitOk;
  }
  if (sc->parsed()) {
    CavityConfig c = cfg.cavity.value_or(CavityConfig{});
    if (sc_a->count()) c.length_a_mm = cf.length_a_mm;
    if (sc_b->count()) c.width_b_mm = cf.width_b_mm;
    if (sc_d->count()) c.height_d_mm = cf.height_d_mm;
    if (sc_mode->count()) {
      for (int i = 0; i < 3; ++i) {
        if (mode[static_cast<std::size_t>(i)] < 0) throw InputError("--mode: indices must be >= 0");
        c.mode[static_cast<std::size_t>(i)] = mode[static_cast<std::size_t>(i)];
      }
    }
    if (c_g) c.g_mhz = c_g;
    if (c_fq) c.f_q_mhz = c_fq;
    if (c_alpha) c.alpha_mhz = c_alpha;
    if (c_chi) c.chi_mhz = c_chi;
    if (c_delta) c.delta_mhz = c_delta;
    emit(simulate_cavity(c), common, out);
    return kExitOk;
  }
  if (sg->parsed()) {
    SweepConfig s = cfg.sweep.value_or(SweepConfig{});
    if (sg_table->count()) s.table = sf.table;
    if (sg_q->count()) s.quantity = sf.quantity;
    if (sg_interp->count()) s.interpolation = sf.interpolation;
    if (sg_v0->count()) s.v_start_v = sf.v_start_v;
    if (sg_v1->count()) s.v_stop_v = sf.v_stop_v;
    if (sg_n->count()) s.points = sf.points;
    if (sg_fb->count()) s.system.f_bare_ghz = sf.system.f_bare_ghz;
    if (sg_g->count()) s.system.g_mhz = sf.system.g_mhz;
    if (sg_ec->count()) s.system.ec_mhz = sf.system.ec_mhz;
    if (sg_gap->count()) s.system.gap_mhz = sf.system.gap_mhz;
    if (s.points < 1) throw InputError("--points: must be >= 1");
    const SweepResult r = run_sweep(s);
    json j = to_json(r);
    j["kind"] = "gate_sweep";
    j["system"] = sweep_system_json(s);
    const std::string path = output_path(dir, "sweep.csv");
    write_text_file(path, to_csv(r));
    j["files"]["csv"] = path;
    if (common.plot) {
      Series fq{"f_Q", {}, {}}, fc{"f_C", {}, {}}, fp{"f_plus", {}, {}}, fm{"f_minus", {}, {}};
      for (const auto& p : r.points) {
        for (auto* s2 : {&fq, &fc, &fp, &fm}) s2->x.push_back(p.v_gate);
        fq.y.push_back(p.f_q_mhz * 1e-3);
        fc.y.push_back(p.f_c_ghz);
        fp.y.push_back(p.f_plus_ghz);
        fm.y.push_back(p.f_minus_ghz);
      }
      const std::string svg = output_path(dir, "sweep.svg");
      write_text_file(svg, line_plot_svg({fq, fc, fp, fm}, "V_G (V)", "frequency (GHz)", "gate sweep"));
      j["files"]["plot"] = svg;
    }
    emit(j, common, out);
    return kExitOk;
  }
  if (sy->parsed()) {
    SynthConfig c;
    if (cfg.synth) {
      c = *cfg.synth;
      if (sy_kind_opt->count() && sy_kind != c.kind) {
        throw InputError("--kind " + sy_kind + " conflicts with synth.kind " + c.kind +
                         " in the config");
      }
    } else {
      c = default_synth(sy_kind.empty() ? "reflection_trace" : sy_kind);
      if (cfg.seed) c.seed = *cfg.seed;
    }
    if (sy_seed_opt->count()) c.seed = sy_seed;
    if (sy_snr_opt->count()) c.snr_db = parse_snr(sy_snr);
    apply_seed_and_snr(c);
    const Dataset d = synthesize(c, cfg.sweep);
    const std::string name = sy_name.empty() ? c.kind : sy_name;
    const std::string data = output_path(dir, name + ".csv");
    const std::string truth = output_path(dir, name + ".truth.json");
    write_text_file(data, d.csv);
    write_text_file(truth, d.truth.dump(2) + "\n");
    json j = {{"kind", "synth"}, {"dataset", c.kind}, {"files", {{"data", data}, {"truth", truth}}},
              {"truth", d.truth}};
    if (common.plot) {
      const std::string svg = output_path(dir, name + ".svg");
      write_text_file(svg, dataset_svg(d, name));
      j["files"]["plot"] = svg;
    }
    emit(j, common, out);
    return kExitOk;
  }
  if (pl->parsed()) {
    const PipelineConfig p = cfg.pipeline.value_or(default_pipeline());
    const json report = run_pipeline(p, pl_rel);
    emit(report, common, out);
    if (!common.quiet) print_table(report, err);
    return report["passed"].get<bool>() ? kExitOk : kExitNoFit;
  }
  return kExitInput;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cqed: circuit-QED spectroscopy toolkit", "cqed"};
  app.require_subcommand(1);
  try {
    return dispatch(app, out, err, args);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNoFit;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace cqed::cli
