#pragma once

#include <json.hpp>
#include <string>
#include <vector>

namespace chunkseam::run {

struct CommandOutcome {
  nlohmann::json result;
  std::vector<std::string> written_files;
  std::vector<std::string> warnings;
};

// Dispatch for the experiment commands:
//   rollout | analyze | scan | decompose | direction | steer | aggregate
// `config_json` merges over the built-in defaults; `inputs` carries file
// arguments (traces for analyze, steering reports for aggregate). Output
// files land under the config's output_dir and the returned result JSON
// embeds the effective config, the tool version and every written path.
CommandOutcome run_command(const std::string& command, const nlohmann::json& config_json,
                           const std::vector<std::string>& inputs);

}  // namespace chunkseam::run
