#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqed_cli/config.hpp"

namespace cqed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNoFit = 2;

inline constexpr const char* kOutDirEnv = "CQED_OUT_DIR";

// Parses argv (argv[0] is the program name), runs the verb and returns the
// process exit code. JSON goes to `out` (or --out), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct StageOutcome {
  nlohmann::json report;
  bool passed = false;
};

// One synth -> fit -> compare stage. Throws InputError labelled with the
// stage name and step.
StageOutcome run_stage(const PipelineStage& stage, double rel_tol_override = 0.0);

nlohmann::json run_pipeline(const PipelineConfig& config, double rel_tol_override = 0.0);

}  // namespace cqed::cli
