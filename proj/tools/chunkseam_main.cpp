// chunkseam command-line front end. Parses arguments, assembles the layered
// run configuration (preset file < config file < flags) and drives the
// shared library through its C API. Machine-readable output goes to stdout,
// progress and errors to stderr.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chunkseam.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCapability = 3;
constexpr int kExitRunner = 4;

int exit_code_for(chunkseam_status status) {
  switch (status) {
    case CHUNKSEAM_OK:
      return kExitOk;
    case CHUNKSEAM_ERROR_CONFIG:
    case CHUNKSEAM_ERROR_INVALID_ARGUMENT:
      return kExitConfig;
    case CHUNKSEAM_ERROR_CAPABILITY:
      return kExitCapability;
    case CHUNKSEAM_ERROR_RUNNER:
      return kExitRunner;
    default:
      return kExitFailure;
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "chunkseam: cannot open config file '" << path << "'\n";
    std::exit(kExitConfig);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json value = json::parse(buffer.str(), nullptr, false);
  if (value.is_discarded() || !value.is_object()) {
    std::cerr << "chunkseam: '" << path << "' is not a JSON object\n";
    std::exit(kExitConfig);
  }
  return value;
}

void merge_into(json& base, const json& layer) {
  for (const auto& [key, value] : layer.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object()) {
      merge_into(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

struct FlagOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<std::int64_t> workers;
  std::optional<std::int64_t> episodes;
  std::optional<std::uint64_t> episode_offset;
  std::optional<std::int64_t> contexts;
  std::optional<std::int64_t> samples;
  std::optional<std::string> vary;
  std::optional<std::int64_t> n_directions;
  std::optional<double> epsilon;
  std::optional<double> alpha;
  std::optional<std::int64_t> warmup;
  std::optional<std::int64_t> episodes_per_arm;
  std::optional<std::string> arms;
  std::optional<std::string> controls;
  std::optional<std::int64_t> first_n;
  std::optional<std::int64_t> n_perm;
  std::optional<std::int64_t> n_boot;
  std::optional<std::string> sidedness;
  std::optional<std::string> env_preset;
  std::optional<double> deviation_scale;
  std::optional<double> tanh_gain;

  json to_json() const {
    json out = json::object();
    if (seed) out["seed"] = *seed;
    if (output_dir) out["output_dir"] = *output_dir;
    if (workers) out["workers"] = *workers;
    if (episodes) out["episodes"] = *episodes;
    if (episode_offset) out["episode_offset"] = *episode_offset;
    if (contexts) out["contexts"] = *contexts;
    if (samples) out["samples"] = *samples;
    if (vary) out["vary"] = *vary;
    if (n_directions) out["n_directions"] = *n_directions;
    if (epsilon) out["epsilon"] = *epsilon;
    if (alpha) out["alpha_magnitude"] = *alpha;
    if (warmup) out["warmup_boundaries"] = *warmup;
    if (episodes_per_arm) out["episodes_per_arm"] = *episodes_per_arm;
    if (arms) out["arms"] = split_csv(*arms);
    if (controls) out["controls"] = split_csv(*controls);
    if (first_n) out["first_n"] = *first_n;
    if (n_perm) out["n_perm"] = *n_perm;
    if (n_boot) out["n_boot"] = *n_boot;
    if (sidedness) out["sidedness"] = *sidedness;
    if (env_preset) out["env"] = json{{"preset", *env_preset}};
    if (deviation_scale) {
      out["policy"]["deviation_scale"] = *deviation_scale;
    }
    if (tanh_gain) {
      out["policy"]["tanh_gain"] = *tanh_gain;
    }
    return out;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chunkseam: measure and steer chunk-boundary artifacts in "
               "action-chunked policies"};
  app.set_version_flag("--version", std::string(chunkseam_version()));
  app.require_subcommand(1);
  // Global flags may appear after the subcommand name.
  app.fallthrough();

  std::string config_path;
  std::string preset_path;
  FlagOverrides flags;

  app.add_option("--config", config_path, "JSON config file")->group("Config");
  app.add_option("--preset", preset_path,
                 "Preset JSON file applied before --config (see presets/)")
      ->group("Config");
  app.add_option("--seed", flags.seed, "Root seed")->group("Config");
  app.add_option("--out", flags.output_dir,
                 "Output directory (default: $CHUNKSEAM_OUT or ./out)")
      ->group("Config");
  app.add_option("--workers", flags.workers, "Max parallel episodes")->group("Config");
  app.add_option("--env-preset", flags.env_preset, "Environment preset: headroom|ceiling")
      ->group("Config");
  app.add_option("--deviation-scale", flags.deviation_scale,
                 "Policy deviation scale (0 disables noise coupling)")
      ->group("Config");
  app.add_option("--tanh-gain", flags.tanh_gain, "Nonlinear deviation gain (0 = affine)")
      ->group("Config");

  auto* cmd_rollout = app.add_subcommand("rollout", "Batch rollouts, no intervention");
  cmd_rollout->fallthrough();
  cmd_rollout->fallthrough();
  cmd_rollout->add_option("--episodes", flags.episodes, "Episode count");
  cmd_rollout->add_option("--episode-offset", flags.episode_offset,
                          "First episode index (for disjoint batches)");

  std::vector<std::string> analyze_inputs;
  auto* cmd_analyze = app.add_subcommand("analyze", "Outcome association on stored traces");
  cmd_analyze->fallthrough();
  cmd_analyze->fallthrough();
  cmd_analyze->add_option("traces", analyze_inputs, "Trace files")->required();
  cmd_analyze->add_option("--controls", flags.controls,
                          "Comma list: all,contact_free,contact_free_first_n");
  cmd_analyze->add_option("--first-n", flags.first_n, "N for the first-N control");
  cmd_analyze->add_option("--n-perm", flags.n_perm, "Permutations per test");
  cmd_analyze->add_option("--sidedness", flags.sidedness, "greater|two_sided");

  auto* cmd_scan = app.add_subcommand("scan", "Fixed-context noise scan");
  cmd_scan->fallthrough();
  cmd_scan->fallthrough();
  cmd_scan->add_option("--contexts", flags.contexts, "Number of frozen contexts");
  cmd_scan->add_option("--samples", flags.samples, "Noise redraws per context");
  cmd_scan->add_option("--vary", flags.vary, "Which noise to redraw: z0|z1|both");

  auto* cmd_decompose = app.add_subcommand("decompose", "z0/z1 noise decomposition");
  cmd_decompose->fallthrough();
  cmd_decompose->fallthrough();
  cmd_decompose->add_option("--contexts", flags.contexts, "Number of frozen contexts");
  cmd_decompose->add_option("--samples", flags.samples, "Samples per condition");

  auto* cmd_direction = app.add_subcommand("direction", "Search steering directions and sweep alpha");
  cmd_direction->fallthrough();
  cmd_direction->fallthrough();
  cmd_direction->add_option("--contexts", flags.contexts, "Number of frozen contexts");
  cmd_direction->add_option("--n-directions", flags.n_directions,
                            "Random candidate directions");
  cmd_direction->add_option("--epsilon", flags.epsilon, "Probe offset for scoring");

  auto* cmd_steer = app.add_subcommand("steer", "Trajectory-level steering arms");
  cmd_steer->fallthrough();
  cmd_steer->fallthrough();
  cmd_steer->add_option("--arms", flags.arms, "Comma list of baseline,good,bad");
  cmd_steer->add_option("--episodes-per-arm", flags.episodes_per_arm, "Episodes per arm");
  cmd_steer->add_option("--alpha", flags.alpha, "Steering magnitude |alpha|");
  cmd_steer->add_option("--warmup", flags.warmup, "Warmup boundaries before steering");
  cmd_steer->add_option("--n-directions", flags.n_directions,
                        "Random candidate directions");
  cmd_steer->add_option("--epsilon", flags.epsilon, "Probe offset for scoring");
  cmd_steer->add_option("--episode-offset", flags.episode_offset,
                        "First episode index (for disjoint batches)");

  std::vector<std::string> aggregate_inputs;
  auto* cmd_aggregate = app.add_subcommand("aggregate", "Pool steering reports across runs");
  cmd_aggregate->fallthrough();
  cmd_aggregate->fallthrough();
  cmd_aggregate->add_option("reports", aggregate_inputs, "steering.json files")
      ->required();
  cmd_aggregate->add_option("--n-boot", flags.n_boot, "Bootstrap resamples");

  CLI11_PARSE(app, argc, argv);

  std::string command;
  const std::vector<std::string>* inputs = nullptr;
  if (cmd_rollout->parsed()) command = "rollout";
  if (cmd_analyze->parsed()) {
    command = "analyze";
    inputs = &analyze_inputs;
  }
  if (cmd_scan->parsed()) {
    command = "scan";
    // scan shares the --contexts/--samples flags with decompose
  }
  if (cmd_decompose->parsed()) command = "decompose";
  if (cmd_direction->parsed()) command = "direction";
  if (cmd_steer->parsed()) command = "steer";
  if (cmd_aggregate->parsed()) {
    command = "aggregate";
    inputs = &aggregate_inputs;
  }

  json config = json::object();
  if (!preset_path.empty()) {
    merge_into(config, load_json_file(preset_path));
  }
  if (!config_path.empty()) {
    merge_into(config, load_json_file(config_path));
  }
  // Flags win over files.
  json flag_layer = flags.to_json();
  // decompose reuses the generic --contexts/--samples flags under its own keys
  if (command == "decompose") {
    if (flag_layer.contains("contexts")) {
      flag_layer["decomp_contexts"] = flag_layer["contexts"];
      flag_layer.erase("contexts");
    }
    if (flag_layer.contains("samples")) {
      flag_layer["decomp_samples"] = flag_layer["samples"];
      flag_layer.erase("samples");
    }
  }
  if (command == "direction" && flag_layer.contains("contexts")) {
    flag_layer["direction_contexts"] = flag_layer["contexts"];
    flag_layer.erase("contexts");
  }
  merge_into(config, flag_layer);
  if (!config.contains("output_dir")) {
    if (const char* env_out = std::getenv("CHUNKSEAM_OUT")) {
      config["output_dir"] = env_out;
    }
  }

  std::vector<const char*> input_ptrs;
  if (inputs) {
    for (const auto& input : *inputs) {
      input_ptrs.push_back(input.c_str());
    }
  }

  std::cerr << "chunkseam " << chunkseam_version() << ": running '" << command << "'\n";
  char* result_json = nullptr;
  chunkseam_status status =
      chunkseam_run(command.c_str(), config.dump().c_str(),
                    input_ptrs.empty() ? nullptr : input_ptrs.data(),
                    input_ptrs.size(), &result_json);
  if (status != CHUNKSEAM_OK) {
    std::cerr << "chunkseam: " << chunkseam_status_name(status) << ": "
              << chunkseam_last_error() << "\n";
    return exit_code_for(status);
  }
  if (result_json != nullptr) {
    std::cout << result_json;
    chunkseam_string_free(result_json);
  }
  std::cerr << "chunkseam: done\n";
  return kExitOk;
}
