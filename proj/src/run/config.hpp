#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "core/metrics.hpp"
#include "sim/env.hpp"
#include "sim/policy.hpp"
#include "stats/stats.hpp"

namespace chunkseam::run {

// Effective run configuration for every command. Every field has a default;
// layers (preset file, config file, flag overrides) merge over the defaults
// and unknown keys are rejected by name.
struct RunConfig {
  std::string env_preset = "headroom";
  sim::EnvConfig env = sim::env_preset("headroom");
  sim::PolicyConfig policy;

  std::int64_t stride = 5;
  std::int64_t horizon = 10;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  std::int64_t episodes = 70;
  std::uint64_t episode_offset = 0;

  std::int64_t contexts = 16;
  std::int64_t samples = 24;
  std::string vary = "z1";

  std::int64_t decomp_contexts = 2;
  std::int64_t decomp_samples = 5;

  std::int64_t direction_contexts = 4;
  std::int64_t n_directions = 12;
  double epsilon = 0.5;
  std::vector<double> alpha_grid{-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0};

  double alpha_magnitude = 1.0;
  std::int64_t warmup_boundaries = 2;
  std::vector<std::string> arms{"baseline", "good", "bad"};
  bool research_each_boundary = false;
  std::int64_t episodes_per_arm = 50;

  std::vector<std::string> controls{"all", "contact_free", "contact_free_first_n"};
  std::int64_t first_n = 50;
  std::int64_t guard_margin = 2;

  std::int64_t n_perm = 20000;
  std::int64_t n_boot = 10000;
  std::string sidedness = "greater";
  double level = 0.95;

  std::int64_t workers = 1;
  std::int64_t reference_episodes = 12;

  // Defaults overlaid with each layer in order (later layers win).
  static RunConfig from_layers(const std::vector<nlohmann::json>& layers);

  nlohmann::json to_json() const;
  // Hash of the science-relevant fields (everything except output_dir and
  // workers, which must not affect results).
  std::string config_hash() const;

  std::vector<metrics::ControlOptions> control_options() const;
  stats::Sidedness sidedness_value() const;
  void validate() const;
};

}  // namespace chunkseam::run
