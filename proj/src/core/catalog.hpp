#pragma once

#include <string>
#include <vector>

#include "core/lq.hpp"

namespace fbdsde {

// Built-in problems used by the CLI, the identity checks and the tests.
// All of them are scalar (n = m = l = d = r = 1) with the same eight-mark
// jump measure on (0, 1).
std::vector<std::string> catalog_names();
bool catalog_has(const std::string& name);

// Throws std::invalid_argument for unknown names.
LqProblem catalog_problem(const std::string& name);

}  // namespace fbdsde
