#pragma once

#include <string>

#include "osc/rates.hpp"

namespace osc {

/// YAML with sections space, input, sweep, lemmas, verdict. Every key is
/// optional; unknown sections or keys are rejected with their line number.
/// All failures raise ErrorKind::config.
SweepConfig parse_config(const std::string &path);
SweepConfig parse_config_text(const std::string &text);

/// Full resolved configuration; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const SweepConfig &cfg);

/// FNV-1a over the serialized configuration, as 16 hex digits.
std::string config_hash(const SweepConfig &cfg);

} // namespace osc
