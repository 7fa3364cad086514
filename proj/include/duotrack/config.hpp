#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "duotrack/metrics.hpp"
#include "duotrack/pipeline.hpp"

namespace duotrack {

/// Everything a config file can set.
struct RunConfig {
  TrackerConfig tracker;
  EvalConfig eval;
};

/// Flat `key = value` text, one entry per line, `#` starts a comment.
/// Keys are dotted field names (backbone.kind, head.correlation, seg.threshold,
/// crop.search_out, tracker.size_smoothing, eval.burn_in, ...). Unknown keys,
/// repeated keys and malformed values raise ConfigError with the line number.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Serialises every key so that parse_config(write_config(c)) == c.
void write_config(std::ostream& out, const RunConfig& config);

}  // namespace duotrack
