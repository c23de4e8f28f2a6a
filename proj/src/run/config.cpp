#include "run/config.hpp"

#include <cinttypes>
#include <cstdio>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace chunkseam::run {

using nlohmann::json;

namespace {

[[noreturn]] void bad_key(const std::string& scope, const std::string& key) {
  throw_error(ErrorCode::config, "unknown config key '" +
                                     (scope.empty() ? key : scope + "." + key) + "'");
}

template <typename T>
void assign(const json& value, T& field, const std::string& scope, const std::string& key) {
  try {
    field = value.get<T>();
  } catch (const json::exception&) {
    throw_error(ErrorCode::config, "bad value for config key '" +
                                       (scope.empty() ? key : scope + "." + key) + "'");
  }
}

void apply_env(const json& layer, RunConfig& config) {
  for (const auto& [key, value] : layer.items()) {
    if (key == "preset") {
      std::string name;
      assign(value, name, "env", key);
      config.env_preset = name;
      config.env = sim::env_preset(name);
    } else if (key == "slip_threshold") {
      assign(value, config.env.slip_threshold, "env", key);
    } else if (key == "slip_sharpness") {
      assign(value, config.env.slip_sharpness, "env", key);
    } else if (key == "scene_jitter") {
      assign(value, config.env.scene_jitter, "env", key);
    } else if (key == "max_steps") {
      assign(value, config.env.max_steps, "env", key);
    } else if (key == "pickup_radius") {
      assign(value, config.env.pickup_radius, "env", key);
    } else if (key == "goal_radius") {
      assign(value, config.env.goal_radius, "env", key);
    } else if (key == "action_clip") {
      assign(value, config.env.action_clip, "env", key);
    } else if (key == "dt") {
      assign(value, config.env.dt, "env", key);
    } else {
      bad_key("env", key);
    }
  }
}

void apply_policy(const json& layer, RunConfig& config) {
  for (const auto& [key, value] : layer.items()) {
    if (key == "deviation_scale") {
      assign(value, config.policy.deviation_scale, "policy", key);
    } else if (key == "coupling_rank") {
      assign(value, config.policy.coupling_rank, "policy", key);
    } else if (key == "flow_steps") {
      assign(value, config.policy.flow_steps, "policy", key);
    } else if (key == "expert_kp") {
      assign(value, config.policy.expert_kp, "policy", key);
    } else if (key == "expert_error_clamp") {
      assign(value, config.policy.expert_error_clamp, "policy", key);
    } else if (key == "transport_ramp") {
      assign(value, config.policy.transport_ramp, "policy", key);
    } else if (key == "bias_scale") {
      assign(value, config.policy.bias_scale, "policy", key);
    } else if (key == "tanh_gain") {
      assign(value, config.policy.tanh_gain, "policy", key);
    } else if (key == "feature_seed") {
      assign(value, config.policy.feature_seed, "policy", key);
    } else {
      bad_key("policy", key);
    }
  }
}

void apply_layer(const json& layer, RunConfig& config) {
  if (!layer.is_object()) {
    throw_error(ErrorCode::config, "config layer must be a JSON object");
  }
  for (const auto& [key, value] : layer.items()) {
    if (key == "env") {
      if (!value.is_object()) {
        throw_error(ErrorCode::config, "'env' must be an object");
      }
      apply_env(value, config);
    } else if (key == "policy") {
      if (!value.is_object()) {
        throw_error(ErrorCode::config, "'policy' must be an object");
      }
      apply_policy(value, config);
    } else if (key == "stride") {
      assign(value, config.stride, "", key);
    } else if (key == "horizon") {
      assign(value, config.horizon, "", key);
    } else if (key == "seed") {
      assign(value, config.seed, "", key);
    } else if (key == "output_dir") {
      assign(value, config.output_dir, "", key);
    } else if (key == "episodes") {
      assign(value, config.episodes, "", key);
    } else if (key == "episode_offset") {
      assign(value, config.episode_offset, "", key);
    } else if (key == "contexts") {
      assign(value, config.contexts, "", key);
    } else if (key == "samples") {
      assign(value, config.samples, "", key);
    } else if (key == "vary") {
      assign(value, config.vary, "", key);
    } else if (key == "decomp_contexts") {
      assign(value, config.decomp_contexts, "", key);
    } else if (key == "decomp_samples") {
      assign(value, config.decomp_samples, "", key);
    } else if (key == "direction_contexts") {
      assign(value, config.direction_contexts, "", key);
    } else if (key == "n_directions") {
      assign(value, config.n_directions, "", key);
    } else if (key == "epsilon") {
      assign(value, config.epsilon, "", key);
    } else if (key == "alpha_grid") {
      assign(value, config.alpha_grid, "", key);
    } else if (key == "alpha_magnitude") {
      assign(value, config.alpha_magnitude, "", key);
    } else if (key == "warmup_boundaries") {
      assign(value, config.warmup_boundaries, "", key);
    } else if (key == "arms") {
      assign(value, config.arms, "", key);
    } else if (key == "research_each_boundary") {
      assign(value, config.research_each_boundary, "", key);
    } else if (key == "episodes_per_arm") {
      assign(value, config.episodes_per_arm, "", key);
    } else if (key == "controls") {
      assign(value, config.controls, "", key);
    } else if (key == "first_n") {
      assign(value, config.first_n, "", key);
    } else if (key == "guard_margin") {
      assign(value, config.guard_margin, "", key);
    } else if (key == "n_perm") {
      assign(value, config.n_perm, "", key);
    } else if (key == "n_boot") {
      assign(value, config.n_boot, "", key);
    } else if (key == "sidedness") {
      assign(value, config.sidedness, "", key);
    } else if (key == "level") {
      assign(value, config.level, "", key);
    } else if (key == "workers") {
      assign(value, config.workers, "", key);
    } else if (key == "reference_episodes") {
      assign(value, config.reference_episodes, "", key);
    } else {
      bad_key("", key);
    }
  }
}

}  // namespace

RunConfig RunConfig::from_layers(const std::vector<json>& layers) {
  RunConfig config;
  for (const auto& layer : layers) {
    apply_layer(layer, config);
  }
  config.validate();
  return config;
}

void RunConfig::validate() const {
  if (stride < 4) {
    throw_error(ErrorCode::config, "stride must be >= 4 (boundary and interior phases)");
  }
  if (horizon < stride) {
    throw_error(ErrorCode::config, "horizon must be >= stride");
  }
  env.validate(stride);
  policy.validate();
  stats::sidedness_from_name(sidedness);
  for (const auto& control : controls) {
    metrics::control_window_from_name(control);
  }
  if (level <= 0.0 || level >= 1.0) {
    throw_error(ErrorCode::config, "level must be in (0, 1)");
  }
  if (workers < 1) {
    throw_error(ErrorCode::config, "workers must be >= 1");
  }
}

json RunConfig::to_json() const {
  json out;
  out["env"]["preset"] = env_preset;
  out["env"]["slip_threshold"] = env.slip_threshold;
  out["env"]["slip_sharpness"] = env.slip_sharpness;
  out["env"]["scene_jitter"] = env.scene_jitter;
  out["env"]["max_steps"] = env.max_steps;
  out["env"]["pickup_radius"] = env.pickup_radius;
  out["env"]["goal_radius"] = env.goal_radius;
  out["env"]["action_clip"] = env.action_clip;
  out["env"]["dt"] = env.dt;
  out["policy"]["deviation_scale"] = policy.deviation_scale;
  out["policy"]["coupling_rank"] = policy.coupling_rank;
  out["policy"]["flow_steps"] = policy.flow_steps;
  out["policy"]["expert_kp"] = policy.expert_kp;
  out["policy"]["expert_error_clamp"] = policy.expert_error_clamp;
  out["policy"]["transport_ramp"] = policy.transport_ramp;
  out["policy"]["bias_scale"] = policy.bias_scale;
  out["policy"]["tanh_gain"] = policy.tanh_gain;
  out["policy"]["feature_seed"] = policy.feature_seed;
  out["stride"] = stride;
  out["horizon"] = horizon;
  out["seed"] = seed;
  out["output_dir"] = output_dir;
  out["episodes"] = episodes;
  out["episode_offset"] = episode_offset;
  out["contexts"] = contexts;
  out["samples"] = samples;
  out["vary"] = vary;
  out["decomp_contexts"] = decomp_contexts;
  out["decomp_samples"] = decomp_samples;
  out["direction_contexts"] = direction_contexts;
  out["n_directions"] = n_directions;
  out["epsilon"] = epsilon;
  out["alpha_grid"] = alpha_grid;
  out["alpha_magnitude"] = alpha_magnitude;
  out["warmup_boundaries"] = warmup_boundaries;
  out["arms"] = arms;
  out["research_each_boundary"] = research_each_boundary;
  out["episodes_per_arm"] = episodes_per_arm;
  out["controls"] = controls;
  out["first_n"] = first_n;
  out["guard_margin"] = guard_margin;
  out["n_perm"] = n_perm;
  out["n_boot"] = n_boot;
  out["sidedness"] = sidedness;
  out["level"] = level;
  out["workers"] = workers;
  out["reference_episodes"] = reference_episodes;
  return out;
}

std::string RunConfig::config_hash() const {
  json science = to_json();
  science.erase("output_dir");
  science.erase("workers");
  std::uint64_t h = fnv1a(science.dump());
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::vector<metrics::ControlOptions> RunConfig::control_options() const {
  std::vector<metrics::ControlOptions> options;
  for (const auto& control : controls) {
    metrics::ControlOptions opt;
    opt.window = metrics::control_window_from_name(control);
    opt.first_n = first_n;
    opt.guard_margin = guard_margin;
    options.push_back(opt);
  }
  return options;
}

stats::Sidedness RunConfig::sidedness_value() const {
  return stats::sidedness_from_name(sidedness);
}

}  // namespace chunkseam::run
