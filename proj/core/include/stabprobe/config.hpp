#pragma once

#include "stabprobe/experiments.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stabprobe {

// Configuration problems map to exit code 2 at the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  ExperimentConfig exp;
  std::string out_dir;
  std::string format = "csv";  // csv | csv+svg
  bool records = false;
};

// Layered resolution: defaults, then the preset's scale, then file entries,
// then flag overrides.  The file holds `key = value` lines with `#`
// comments.  Unknown keys and unparsable values throw ConfigError naming
// the offender.  `require_out_dir` is relaxed for commands that emit no
// files.
CliConfig parse_config(const std::optional<std::string>& file_path,
                       const std::vector<std::pair<std::string, std::string>>& overrides,
                       bool require_out_dir = true);

// Full `key = value` echo of a resolved config, fixed key order.
std::string resolved_text(const CliConfig& cfg);

// Writes resolved_text to <out_dir>/config.resolved, creating out_dir.
void write_resolved(const CliConfig& cfg);

}  // namespace stabprobe
