#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cqed/error.hpp"
#include "cqed/io.hpp"
#include "cqed/resonator.hpp"
#include "cqed/textio.hpp"
#include "cqed_cli/commands.hpp"
#include "cqed_cli/config.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cqed;
using namespace cqed::cli;

const std::string kConfigs = std::string(CQED_SOURCE_DIR) + "/configs";

struct Run {
  int code = -1;
  std::string out;
  std::string err;
  json doc() const { return json::parse(out); }
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cqed");
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("cqed_cli_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv(kOutDirEnv);
  }
  void TearDown() override {
    unsetenv(kOutDirEnv);
    fs::remove_all(dir_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    write_text_file(path(name), text);
    return path(name);
  }
  fs::path dir_;
};

// ---- configuration ------------------------------------------------------

TEST(Config, UnknownKeyIsRejectedWithUnitHint) {
  try {
    parse_config("synth:\n  kind: lineshape\n  fwhm: 21\n");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("synth.fwhm"), std::string::npos) << msg;
    EXPECT_NE(msg.find("fwhm_mhz"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_config("colour: blue\n"), InputError);
  EXPECT_THROW(parse_config("simulate_cavity:\n  length_a: 70\n"), InputError);
}

TEST(Config, ValuesWithUnitsAreRejected) {
  EXPECT_THROW(parse_config("synth:\n  kind: lineshape\n  fwhm_mhz: 21 MHz\n"), InputError);
  EXPECT_THROW(parse_config("simulate_cavity:\n  length_a_mm: -70\n"), InputError);
  EXPECT_THROW(parse_config("simulate_cavity:\n  mode: [1, 0]\n"), InputError);
  EXPECT_THROW(parse_config("synth:\n  kind: reflection_trace\n  theta_rad: 2.0\n"), InputError);
  EXPECT_THROW(parse_config("synth:\n  kind: reflection_trace\n  ql: 100\n  qi: 200\n"),
               InputError);
  EXPECT_THROW(parse_config("synth:\n  kind: lineshape\n  depth: 2\n  offset: 1\n"), InputError);
  EXPECT_THROW(parse_config("synth: [1, 2]\n"), InputError);
  EXPECT_THROW(parse_config("synth:\n  kind: nonsense\n"), InputError);
}

TEST(Config, MalformedYamlReportsLine) {
  try {
    parse_config("synth:\n  kind: lineshape\n   bad: [\n");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
  }
}

TEST(Config, ParsesEveryShippedConfig) {
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".yaml") continue;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
  }
}

TEST(Config, TablePathIsRelativeToTheConfigFile) {
  const auto c = load_config(kConfigs + "/gate_sweep.yaml");
  ASSERT_TRUE(c.sweep.has_value());
  EXPECT_TRUE(fs::exists(c.sweep->table)) << c.sweep->table;
}

TEST(Config, PipelineNeedsToleranceBlockAndTruthForInputs) {
  EXPECT_THROW(parse_config("pipeline:\n  stages:\n    - synth: {kind: lineshape}\n"), InputError);
  EXPECT_THROW(parse_config("pipeline:\n  stages:\n    - input: x.csv\n      fit: rabi\n"
                            "      compare: {t_r_ns: {abs: 60}}\n"),
               InputError);
  EXPECT_THROW(parse_config("pipeline:\n  stages:\n    - synth: {kind: lineshape}\n"
                            "      compare: {fwhm_mhz: {abs: 1, rel: 0.1}}\n"),
               InputError);
  const auto c = parse_config(
      "pipeline:\n  stages:\n    - synth: {kind: lineshape}\n      compare: {fwhm_mhz: {rel: 0.1}}\n");
  ASSERT_TRUE(c.pipeline.has_value());
  EXPECT_EQ(c.pipeline->stages.at(0).fit, "lorentzian");
}

// ---- fits -----------------------------------------------------------------

TEST_F(CliTest, FitResonatorRecoversInternalQ) {
  ASSERT_EQ(cli({"synth", "--kind", "reflection_trace", "--seed", "1", "--out-dir", path("")}).code, 0);
  const auto r = cli({"fit-resonator", path("reflection_trace.csv"), "--out-dir", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.doc();
  EXPECT_EQ(j["kind"], "reflection");
  EXPECT_TRUE(j["converged"].get<bool>());
  const double qi = j["params"]["qi"].get<double>();
  EXPECT_GE(qi, 75000.0);
  EXPECT_LE(qi, 85000.0);
  EXPECT_FALSE(j["params"].contains("delay_ns"));

  const auto res = read_csv_file(path("reflection_trace.residuals.csv"));
  EXPECT_EQ(res.header, (std::vector<std::string>{"freq_ghz", "re", "im"}));
  EXPECT_EQ(res.rows.size(), 1601u);
}

TEST_F(CliTest, DelayOptionMatrix) {
  ASSERT_EQ(cli({"synth", "--kind", "reflection_trace", "--out-dir", path("")}).code, 0);
  const std::string trace = path("reflection_trace.csv");
  const std::string cfg = write("delay.yaml", "fit:\n  delay: true\n");
  struct Case {
    std::vector<std::string> extra;
    bool expect_delay;
  };
  const std::vector<Case> cases = {{{}, false},
                                   {{"--delay"}, true},
                                   {{"-c", cfg}, true},
                                   {{"-c", cfg, "--no-delay"}, false},
                                   {{"--no-delay"}, false}};
  for (const auto& c : cases) {
    std::vector<std::string> args = {"fit-resonator", trace, "--out-dir", path("")};
    args.insert(args.end(), c.extra.begin(), c.extra.end());
    const auto r = cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.doc()["params"].contains("delay_ns"), c.expect_delay) << args.back();
  }
}

TEST_F(CliTest, FitResonatorRecoversCableDelay) {
  const std::string cfg = write("s.yaml",
                                "synth:\n  kind: reflection_trace\n  seed: 3\n  snr_db: 40\n"
                                "  delay_ns: 0.8\n  half_span_linewidths: 20\n");
  ASSERT_EQ(cli({"synth", "-c", cfg, "--out-dir", path("")}).code, 0);
  const auto r = cli({"fit-resonator", path("reflection_trace.csv"), "--delay", "--out-dir", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto p = r.doc()["params"];
  EXPECT_NEAR(p["delay_ns"].get<double>(), 0.8, 0.01);
  EXPECT_NEAR(p["ql"].get<double>(), 6740.0, 0.02 * 6740.0);
}

TEST_F(CliTest, EmptyAndMalformedFilesExitOneWithLineNumber) {
  const auto empty = cli({"fit-resonator", write("empty.csv", ""), "--out-dir", path("")});
  EXPECT_EQ(empty.code, kExitInput);
  EXPECT_NE(empty.err.find("empty.csv"), std::string::npos) << empty.err;

  const auto bad = cli({"fit-resonator", write("bad.csv", "freq_ghz,re,im\n5.0,1,0\n5.1,x,0\n"),
                        "--out-dir", path("")});
  EXPECT_EQ(bad.code, kExitInput);
  EXPECT_NE(bad.err.find("line 3"), std::string::npos) << bad.err;

  const auto wrong = cli({"fit-rabi", write("w.csv", "freq_ghz,mag_db\n1,2\n"), "--out-dir", path("")});
  EXPECT_EQ(wrong.code, kExitInput);

  EXPECT_EQ(cli({"fit-lorentzian", path("missing.csv")}).code, kExitInput);
}

TEST_F(CliTest, NoDipExitsTwo) {
  std::string flat = "freq_ghz,mag_db\n";
  for (int i = 0; i < 100; ++i) flat += format_double(4.4 + 0.002 * i) + ",0\n";
  const auto r = cli({"fit-lorentzian", write("flat.csv", flat), "--out-dir", path("")});
  EXPECT_EQ(r.code, kExitNoFit);
  EXPECT_NE(r.err.find("no dip"), std::string::npos) << r.err;
}

TEST_F(CliTest, LorentzianAndRabiFitsRoundTrip) {
  ASSERT_EQ(cli({"synth", "--kind", "lineshape", "--out-dir", path("")}).code, 0);
  ASSERT_EQ(cli({"synth", "--kind", "rabi_trace", "--out-dir", path("")}).code, 0);
  const auto l = cli({"fit-lorentzian", path("lineshape.csv"), "--out-dir", path("")});
  ASSERT_EQ(l.code, 0) << l.err;
  EXPECT_NEAR(l.doc()["params"]["fwhm_mhz"].get<double>(), 21.0, 2.1);
  const auto rb = cli({"fit-rabi", path("rabi_trace.csv"), "--out-dir", path("")});
  ASSERT_EQ(rb.code, 0) << rb.err;
  EXPECT_NEAR(rb.doc()["params"]["t_r_ns"].get<double>(), 260.0, 60.0);
}

TEST_F(CliTest, JsonGoesToOutPathWhenGiven) {
  ASSERT_EQ(cli({"synth", "--kind", "lineshape", "--out-dir", path("")}).code, 0);
  const auto r = cli({"fit-lorentzian", path("lineshape.csv"), "--out", path("fit.json"),
                      "--out-dir", path("")});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(json::parse(read_text_file(path("fit.json")))["kind"], "lorentzian");
}

// ---- simulation -------------------------------------------------------------

TEST_F(CliTest, CavityTe101WithReferenceDimensions) {
  const auto r = cli({"simulate-cavity", "--a-mm", "70", "--b-mm", "5", "--d-mm", "30"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.doc()["f_ghz"].get<double>(), 5.443, 0.005 * 5.443);
}

TEST_F(CliTest, CavityCouplingEstimateInvertsShift) {
  const auto r = cli({"simulate-cavity", "--chi-mhz", "10", "--delta-mhz", "1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.doc()["coupling_estimate"]["g_mhz"].get<double>(), 100.0, 1e-12);
  EXPECT_EQ(cli({"simulate-cavity", "--g-mhz", "100"}).code, kExitInput);
}

TEST_F(CliTest, GatemonFullTransmissionGivesQuarterEc) {
  const auto r = cli({"simulate-qubit", "--kind", "gatemon", "--ec-mhz", "190", "--gap-mhz",
                      "190000", "--transmission", "1", "--out-dir", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = r.doc()["spectrum"];
  EXPECT_NEAR(s["alpha"].get<double>(), -190.0 / 4.0, 0.1 * 190.0 / 4.0);
  // Independent charge-basis oracle (tests/oracles/spectra_oracle.py).
  EXPECT_NEAR(s["f01"].get<double>(), 8449.288804130367, 1e-3);
  EXPECT_NEAR(s["alpha"].get<double>(), -48.11296900108573, 1e-3);
}

TEST_F(CliTest, TransmonSpectrumAndLevelsCsv) {
  const auto r = cli({"simulate-qubit", "--ej-mhz", "9500", "--out-dir", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.doc()["spectrum"]["f01"].get<double>(), 3598.964595620192, 1e-6);
  EXPECT_NEAR(r.doc()["spectrum"]["alpha"].get<double>(), -218.35237555283038, 1e-6);
  const auto levels = read_csv_file(path("spectrum.csv"));
  EXPECT_EQ(levels.header, (std::vector<std::string>{"level", "energy_mhz"}));
  EXPECT_EQ(levels.rows.size(), 8u);
  EXPECT_EQ(cli({"simulate-qubit", "--out-dir", path("")}).code, kExitInput);  // EJ missing
}

TEST_F(CliTest, TransmissionInferenceFromConfig) {
  const auto r = cli({"simulate-qubit", "-c", kConfigs + "/gatemon.yaml", "--out-dir", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto inf = r.doc()["inferred"];
  EXPECT_NEAR(inf["alpha_mhz"].get<double>(), -172.0, 1.0);
  EXPECT_GT(inf["transmission"].get<double>(), 0.0);
  EXPECT_LT(inf["transmission"].get<double>(), 1.0);
  EXPECT_EQ(r.doc()["alpha_table"].size(), 21u);
  EXPECT_TRUE(fs::exists(path("spectrum.alpha_table.csv")));
}

TEST_F(CliTest, SweepFileMatchesOracleRows) {
  const auto r = cli({"sweep-gate", "-c", kConfigs + "/gate_sweep.yaml", "--out-dir", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = read_csv_file(path("sweep.csv"));
  ASSERT_EQ(t.header, (std::vector<std::string>{"V_G", "f_Q_MHz", "chi_MHz", "f_C_GHz",
                                                "f_plus_GHz", "f_minus_GHz"}));
  ASSERT_EQ(t.rows.size(), 161u);
  auto at = [&](double v) {
    for (const auto& row : t.rows) {
      if (std::abs(row[0] - v) < 1e-12) return row;
    }
    ADD_FAILURE() << "no row at V_G = " << v;
    return std::vector<double>(6, NAN);
  };
  // Pinch-off: bare cavity.
  EXPECT_EQ(at(1.0)[3], 5.2816);
  EXPECT_EQ(at(1.0)[1], 0.0);
  // Table node EJ = 12000 MHz, dispersive: oracle f01 and f_bare + g^2/delta.
  EXPECT_NEAR(at(3.0)[1], 4071.192851714777, 1e-6);
  EXPECT_NEAR(at(3.0)[3], 5.289861682867759, 1e-9);
  // Table node EJ = 21000 MHz, within 10 g: eigenvalues of the 2x2 coupling matrix.
  EXPECT_NEAR(at(4.0)[4], 5.498787403019512, 1e-9);
  EXPECT_NEAR(at(4.0)[5], 5.235556813972763, 1e-9);

  // Same config, same bytes.
  const std::string first = read_text_file(path("sweep.csv"));
  ASSERT_EQ(cli({"sweep-gate", "-c", kConfigs + "/gate_sweep.yaml", "--out-dir", path("")}).code, 0);
  EXPECT_EQ(read_text_file(path("sweep.csv")), first);
}

TEST_F(CliTest, SweepTableHeaderMustCarryUnits) {
  const std::string table = write("t.csv", "V_G,EJ\n0,0\n1,1000\n");
  const auto r = cli({"sweep-gate", "--table", table, "--out-dir", path("")});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("EJ_MHz"), std::string::npos) << r.err;
}

TEST_F(CliTest, FlagsOverrideConfig) {
  const std::string cfg = write("c.yaml",
                                "simulate_cavity:\n  length_a_mm: 70\n  width_b_mm: 5\n"
                                "  height_d_mm: 30\n  mode: [1, 0, 1]\n");
  const double from_cfg = cli({"simulate-cavity", "-c", cfg}).doc()["f_ghz"].get<double>();
  const double overridden =
      cli({"simulate-cavity", "-c", cfg, "--mode", "1,0,2"}).doc()["f_ghz"].get<double>();
  EXPECT_GT(overridden, from_cfg);

  const std::string s = write("s.yaml", "seed: 5\nsynth:\n  kind: rabi_trace\n");
  EXPECT_EQ(cli({"synth", "-c", s, "--out-dir", path("")}).doc()["truth"]["seed"], 5);
  EXPECT_EQ(cli({"synth", "-c", s, "--seed", "6", "--out-dir", path("")}).doc()["truth"]["seed"], 6);
  EXPECT_EQ(cli({"synth", "-c", s, "--kind", "lineshape", "--out-dir", path("")}).code, kExitInput);
}

// ---- synthesis -------------------------------------------------------------

TEST_F(CliTest, SynthIsByteIdenticalPerSeedIncludingSvg) {
  for (const std::string kind : {"reflection_trace", "gate_map", "two_tone_map"}) {
    ASSERT_EQ(cli({"synth", "--kind", kind, "--seed", "9", "--plot", "--out-dir", path("a")}).code, 0);
    ASSERT_EQ(cli({"synth", "--kind", kind, "--seed", "9", "--plot", "--out-dir", path("b")}).code, 0);
    for (const std::string ext : {".csv", ".truth.json", ".svg"}) {
      EXPECT_EQ(read_text_file(path("a/" + kind + ext)), read_text_file(path("b/" + kind + ext)))
          << kind << ext;
    }
  }
  ASSERT_EQ(cli({"synth", "--kind", "reflection_trace", "--seed", "10", "--out-dir", path("c")}).code, 0);
  EXPECT_NE(read_text_file(path("a/reflection_trace.csv")),
            read_text_file(path("c/reflection_trace.csv")));
}

TEST_F(CliTest, GateMapGridShape) {
  const auto r = cli({"synth", "-c", kConfigs + "/synth_gate_map.yaml", "--out-dir", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Grid2D g = read_grid_csv(path("gate_map.csv"));
  EXPECT_EQ(g.values.rows(), 81);
  EXPECT_EQ(g.values.cols(), 601);
  EXPECT_EQ(g.slow.front(), 0.0);
  EXPECT_EQ(g.slow.back(), 8.0);
}

TEST_F(CliTest, RabiSynthWritesTimeSeries) {
  ASSERT_EQ(cli({"synth", "--kind", "rabi_trace", "--out-dir", path("")}).code, 0);
  const auto t = read_csv_file(path("rabi_trace.csv"));
  EXPECT_EQ(t.header, (std::vector<std::string>{"t_ns", "y"}));
  EXPECT_EQ(t.rows.size(), 201u);
}

TEST_F(CliTest, InvalidSynthSpecExitsOne) {
  const std::string cfg = write("s.yaml", "synth:\n  kind: lineshape\n  points: 1\n");
  EXPECT_EQ(cli({"synth", "-c", cfg, "--out-dir", path("")}).code, kExitInput);
  EXPECT_EQ(cli({"synth", "--kind", "bogus", "--out-dir", path("")}).code, kExitInput);
  EXPECT_EQ(cli({"synth", "--snr-db", "loud", "--out-dir", path("")}).code, kExitInput);
}

TEST_F(CliTest, OutputDirectoryPrecedence) {
  setenv(kOutDirEnv, path("env").c_str(), 1);
  ASSERT_EQ(cli({"synth", "--kind", "rabi_trace"}).code, 0);
  EXPECT_TRUE(fs::exists(path("env/rabi_trace.csv")));
  ASSERT_EQ(cli({"synth", "--kind", "rabi_trace", "--out-dir", path("flag")}).code, 0);
  EXPECT_TRUE(fs::exists(path("flag/rabi_trace.csv")));
  const std::string cfg = write("c.yaml", "output_dir: cfg\n");
  ASSERT_EQ(cli({"synth", "--kind", "rabi_trace", "-c", cfg}).code, 0);
  EXPECT_TRUE(fs::exists(path("cfg/rabi_trace.csv")));
}

// ---- pipeline -------------------------------------------------------------

TEST_F(CliTest, DefaultPipelinePasses) {
  const auto r = cli({"pipeline", "--out-dir", path("")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.doc();
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["stages"].size(), 5u);
  for (const auto& st : j["stages"]) EXPECT_EQ(st["status"], "pass") << st.dump();
}

TEST_F(CliTest, ShippedPipelineConfigMatchesDefault) {
  const auto a = cli({"pipeline", "--out-dir", path("")});
  const auto b = cli({"pipeline", "-c", kConfigs + "/pipeline.yaml", "--out-dir", path("")});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.doc()["stages"], b.doc()["stages"]);
}

TEST_F(CliTest, TightenedToleranceReportsFailures) {
  const auto r = cli({"pipeline", "--rel-tol", "0.0001", "--out-dir", path("")});
  EXPECT_NE(r.code, 0);
  const auto j = r.doc();
  EXPECT_FALSE(j["passed"].get<bool>());
  int failed = 0;
  for (const auto& st : j["stages"]) {
    for (const auto& q : st["quantities"]) {
      EXPECT_EQ(q["mode"], "rel");
      if (!q["pass"].get<bool>()) ++failed;
    }
  }
  EXPECT_GE(failed, 4);
  EXPECT_NE(r.err.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, MissingStageInputIsLabelled) {
  const std::string cfg = write("p.yaml",
                                "pipeline:\n  stages:\n    - name: measured\n      input: nope.csv\n"
                                "      fit: rabi\n      compare: {t_r_ns: {truth: 260, abs: 60}}\n");
  const auto r = cli({"pipeline", "-c", cfg, "--out-dir", path("")});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("stage 'measured' (input)"), std::string::npos) << r.err;
}

TEST_F(CliTest, PipelineReadsInputFiles) {
  ASSERT_EQ(cli({"synth", "--kind", "rabi_trace", "--out-dir", path("")}).code, 0);
  const std::string cfg = write("p.yaml",
                                "pipeline:\n  stages:\n    - name: measured\n"
                                "      input: rabi_trace.csv\n      fit: rabi\n"
                                "      compare: {t_r_ns: {truth: 260, abs: 60}, nonsense: {truth: 1, abs: 1}}\n");
  const auto bad = cli({"pipeline", "-c", cfg, "--out-dir", path("")});
  EXPECT_EQ(bad.code, kExitInput);
  EXPECT_NE(bad.err.find("stage 'measured' (compare)"), std::string::npos) << bad.err;

  write("p.yaml",
        "pipeline:\n  stages:\n    - name: measured\n      input: rabi_trace.csv\n      fit: rabi\n"
        "      compare: {t_r_ns: {truth: 260, abs: 60}}\n");
  const auto ok = cli({"pipeline", "-c", cfg, "--out-dir", path("")});
  EXPECT_EQ(ok.code, 0) << ok.err;
}

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({}).code, kExitInput);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitInput);
  EXPECT_EQ(cli({"fit-resonator"}).code, kExitInput);
}

}  // namespace
