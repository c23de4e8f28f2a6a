#include "run/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "core/error.hpp"
#include "core/version.hpp"
#include "experiments/experiments.hpp"
#include "io/report_io.hpp"
#include "io/trace_io.hpp"
#include "run/config.hpp"

namespace chunkseam::run {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json meta_for(const std::string& command, const RunConfig& config) {
  json meta;
  meta["command"] = command;
  meta["tool"] = "chunkseam";
  meta["tool_version"] = kVersion;
  meta["config"] = config.to_json();
  meta["config_hash"] = config.config_hash();
  return meta;
}

void emit(CommandOutcome& outcome, const fs::path& path, const std::string& content) {
  io::write_text_file(path, content);
  outcome.written_files.push_back(path.string());
}

void emit_json(CommandOutcome& outcome, const fs::path& path, const json& value) {
  emit(outcome, path, value.dump(2) + "\n");
}

experiments::AssociationParams association_params(const RunConfig& config) {
  experiments::AssociationParams params;
  params.n_episodes = config.episodes;
  params.stride_k = config.stride;
  params.seed = config.seed;
  params.episode_offset = config.episode_offset;
  params.controls = config.control_options();
  params.n_perm = config.n_perm;
  params.sidedness = config.sidedness_value();
  params.workers = config.workers;
  return params;
}

CommandOutcome cmd_rollout(const RunConfig& config) {
  CommandOutcome outcome;
  sim::Policy policy(config.policy, config.env, config.horizon);
  std::vector<RolloutTrace> traces(static_cast<std::size_t>(config.episodes));
  experiments::parallel_for(config.episodes, config.workers, [&](std::int64_t i) {
    auto result =
        sim::rollout(policy, config.env, config.stride, config.seed,
                     config.episode_offset + static_cast<std::uint64_t>(i));
    result.trace.config_hash = config.config_hash();
    traces[static_cast<std::size_t>(i)] = std::move(result.trace);
  });

  fs::path out_dir = fs::path(config.output_dir);
  json manifest = meta_for("rollout", config);
  json episodes = json::array();
  for (const auto& trace : traces) {
    fs::path trace_path = out_dir / "traces" / (trace.episode_id + ".trace");
    emit(outcome, trace_path, io::trace_to_string(trace));
    json entry;
    entry["episode_id"] = trace.episode_id;
    entry["file"] = std::string("traces/") + trace.episode_id + ".trace";
    entry["outcome"] = trace.success ? "success" : "failure";
    entry["steps"] = trace.steps();
    episodes.push_back(std::move(entry));
  }
  manifest["episodes"] = std::move(episodes);
  emit_json(outcome, out_dir / "rollout_manifest.json", manifest);
  outcome.result = std::move(manifest);
  return outcome;
}

CommandOutcome cmd_analyze(const RunConfig& config, const std::vector<std::string>& inputs) {
  if (inputs.empty()) {
    throw_error(ErrorCode::config, "analyze needs at least one trace file argument");
  }
  CommandOutcome outcome;
  std::vector<RolloutTrace> traces;
  traces.reserve(inputs.size());
  for (const auto& input : inputs) {
    traces.push_back(io::read_trace(input));
  }
  // Heterogeneous provenance is legal but worth flagging.
  for (const auto& trace : traces) {
    if (trace.config_hash != traces.front().config_hash) {
      outcome.warnings.push_back("traces carry mixed config hashes ('" +
                                 traces.front().config_hash + "' vs '" +
                                 trace.config_hash + "' in " + trace.episode_id + ")");
      break;
    }
  }
  auto params = association_params(config);
  params.n_episodes = static_cast<std::int64_t>(traces.size());
  auto report = experiments::association_from_traces(traces, params);

  json result = meta_for("analyze", config);
  result["inputs"] = inputs;
  result["warnings"] = outcome.warnings;
  result["report"] = io::to_json(report);
  fs::path out_dir = fs::path(config.output_dir);
  emit_json(outcome, out_dir / "analysis.json", result);
  emit(outcome, out_dir / "analysis.csv", io::association_csv(report));
  emit(outcome, out_dir / "timecourse.csv", io::timecourse_csv(report));
  outcome.result = std::move(result);
  return outcome;
}

CommandOutcome cmd_scan(const RunConfig& config) {
  CommandOutcome outcome;
  experiments::ScanParams params;
  params.n_contexts = config.contexts;
  params.n_samples = config.samples;
  params.vary = config.vary;
  params.reference_episodes = config.reference_episodes;
  params.stride_k = config.stride;
  params.seed = config.seed;
  params.n_boot = config.n_boot;
  params.level = config.level;
  auto scan = experiments::run_noise_scan(config.policy, config.env, config.horizon, params);

  json result = meta_for("scan", config);
  result["scan"] = io::to_json(scan);
  fs::path out_dir = fs::path(config.output_dir);
  emit_json(outcome, out_dir / "scan.json", result);
  emit(outcome, out_dir / "scan.csv", io::scan_csv(scan));
  outcome.result = std::move(result);
  return outcome;
}

CommandOutcome cmd_decompose(const RunConfig& config) {
  CommandOutcome outcome;
  experiments::DecompositionParams params;
  params.n_contexts = config.decomp_contexts;
  params.n_samples = config.decomp_samples;
  params.reference_episodes = config.reference_episodes;
  params.stride_k = config.stride;
  params.seed = config.seed;
  auto rows = experiments::run_decomposition(config.policy, config.env, config.horizon,
                                             params);

  json result = meta_for("decompose", config);
  result["rows"] = io::to_json(rows);
  fs::path out_dir = fs::path(config.output_dir);
  emit_json(outcome, out_dir / "decomposition.json", result);
  emit(outcome, out_dir / "decomposition.csv", io::decomposition_csv(rows));
  outcome.result = std::move(result);
  return outcome;
}

CommandOutcome cmd_direction(const RunConfig& config) {
  CommandOutcome outcome;
  experiments::DirectionParams params;
  params.n_contexts = config.direction_contexts;
  params.n_directions = config.n_directions;
  params.epsilon = config.epsilon;
  params.alpha_grid = config.alpha_grid;
  params.reference_episodes = config.reference_episodes;
  params.stride_k = config.stride;
  params.seed = config.seed;
  auto result_data = experiments::run_direction_search(config.policy, config.env,
                                                       config.horizon, params);

  json result = meta_for("direction", config);
  result["direction"] = io::to_json(result_data);
  fs::path out_dir = fs::path(config.output_dir);
  emit_json(outcome, out_dir / "direction.json", result);
  emit(outcome, out_dir / "sweeps.csv", io::sweeps_csv(result_data.sweeps));
  outcome.result = std::move(result);
  return outcome;
}

CommandOutcome cmd_steer(const RunConfig& config) {
  CommandOutcome outcome;
  experiments::SteeringParams params;
  params.arms = config.arms;
  params.n_episodes_per_arm = config.episodes_per_arm;
  params.alpha_magnitude = config.alpha_magnitude;
  params.warmup_boundaries = config.warmup_boundaries;
  params.n_directions = config.n_directions;
  params.epsilon = config.epsilon;
  params.research_each_boundary = config.research_each_boundary;
  params.stride_k = config.stride;
  params.seed = config.seed;
  params.episode_offset = config.episode_offset;
  params.n_boot = config.n_boot;
  params.level = config.level;
  params.workers = config.workers;
  auto run = experiments::run_trajectory_steering(config.policy, config.env,
                                                  config.horizon, params);

  json result = meta_for("steer", config);
  result["steering"] = io::to_json(run);
  fs::path out_dir = fs::path(config.output_dir);
  emit_json(outcome, out_dir / "steering.json", result);
  emit(outcome, out_dir / "groups.csv", io::groups_csv(run.groups));
  outcome.result = std::move(result);
  return outcome;
}

CommandOutcome cmd_aggregate(const RunConfig& config,
                             const std::vector<std::string>& inputs) {
  if (inputs.empty()) {
    throw_error(ErrorCode::config, "aggregate needs at least one steering report");
  }
  CommandOutcome outcome;
  std::vector<experiments::SteeringRunResult> runs;
  for (const auto& input : inputs) {
    json value = json::parse(io::read_text_file(input), nullptr, false);
    if (value.is_discarded()) {
      throw_error(ErrorCode::io, "cannot parse steering report '" + input + "'");
    }
    auto steering = value.find("steering");
    if (steering == value.end()) {
      throw_error(ErrorCode::io,
                  "'" + input + "' is not a steering report (no 'steering' key)");
    }
    runs.push_back(io::steering_run_from_json(*steering));
  }
  auto pooled = experiments::aggregate_reports(runs, config.seed, config.n_boot,
                                               config.level);

  json result = meta_for("aggregate", config);
  result["inputs"] = inputs;
  result["aggregate"] = io::to_json(pooled);
  fs::path out_dir = fs::path(config.output_dir);
  emit_json(outcome, out_dir / "aggregate.json", result);
  emit(outcome, out_dir / "aggregate.csv", io::groups_csv(pooled.groups));
  outcome.result = std::move(result);
  return outcome;
}

}  // namespace

CommandOutcome run_command(const std::string& command, const json& config_json,
                           const std::vector<std::string>& inputs) {
  RunConfig config = RunConfig::from_layers({config_json});
  if (command == "rollout") {
    return cmd_rollout(config);
  }
  if (command == "analyze") {
    return cmd_analyze(config, inputs);
  }
  if (command == "scan") {
    return cmd_scan(config);
  }
  if (command == "decompose") {
    return cmd_decompose(config);
  }
  if (command == "direction") {
    return cmd_direction(config);
  }
  if (command == "steer") {
    return cmd_steer(config);
  }
  if (command == "aggregate") {
    return cmd_aggregate(config, inputs);
  }
  throw_error(ErrorCode::config, "unknown command '" + command + "'");
}

}  // namespace chunkseam::run
