#pragma once

#include <stdexcept>
#include <string>

#include "core/lq.hpp"

namespace fbdsde {

// Raised when the config text is not valid JSON. Content-level problems
// (bad shapes, unknown keys, invalid values) raise std::invalid_argument
// with the offending key in the message.
struct ConfigParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

LqProblem parse_lq_config(const std::string& json_text);
LqProblem load_lq_config(const std::string& path);

// Deterministic serialization; parse_lq_config(lq_config_to_json(x)) is x.
std::string lq_config_to_json(const LqProblem& lq);

}  // namespace fbdsde
