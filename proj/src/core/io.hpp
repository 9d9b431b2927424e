#pragma once

#include <string>

#include "core/paths.hpp"
#include "core/types.hpp"

namespace fbdsde {

// Fixed "%.17g" rendering so artifacts round-trip doubles exactly and byte
// comparisons are meaningful.
std::string format_double(double x);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string sha256_hex(const std::string& bytes);

// CSV snapshots of a solved trajectory set: a per-node cross-path mean/std
// table over all paths, and a full-resolution dump of the first
// `sample_paths` paths.
std::string state_summary_csv(const StatePaths& s);
std::string state_sample_csv(const StatePaths& s, int sample_paths);
std::string adjoint_summary_csv(const AdjointPaths& a);
std::string adjoint_sample_csv(const AdjointPaths& a, int sample_paths);
std::string control_csv(const ControlProcess& u, const TimeGrid& grid);

}  // namespace fbdsde
