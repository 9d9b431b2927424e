#pragma once

#include <string>

namespace fbdsde {

struct RunResult {
  int exit_code = 0;  // 0 clean, 1 when a run's embedded checks fail
  std::string summary_json;
  std::string out_dir;
};

// Executes one run described by a JSON document and writes its artifacts
// plus a manifest of content hashes under out_dir. Modes: solve, adjoint,
// audit, optimize, identities, verify-example. The returned summary is the
// same JSON written to <out_dir>/<mode>_report.json. Throws
// ConfigParseError on malformed input and std::invalid_argument on
// structurally bad problems or options.
RunResult run_pipeline(const std::string& run_config_json);

}  // namespace fbdsde
