#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "core/rng.hpp"
#include "core/types.hpp"

namespace chunkseam::sim {

// Full observable state of the grasp-and-transport testbed. `object_home`
// (the object's episode start position) and `grasp_step` are part of the
// state so that replanning from a snapshot is a pure function of the
// snapshot: the expert's transport ramp and the frozen context features
// depend on them.
struct EnvState {
  Vector2d agent_pos{0.0, 0.0};
  Vector2d agent_vel{0.0, 0.0};
  Vector2d object_pos{0.0, 0.0};
  Vector2d object_home{0.0, 0.0};
  bool carrying = false;
  bool dropped = false;
  std::int64_t step_index = 0;
  std::int64_t grasp_step = -1;
};

struct EnvConfig {
  std::string preset = "headroom";
  Vector2d agent_start{0.0, 0.0};
  Vector2d object_start{1.2, 0.8};
  Vector2d goal{2.4, 0.0};
  double pickup_radius = 0.12;
  double goal_radius = 0.15;
  std::int64_t max_steps = 160;
  // Carried-object slip channel: per-step drop probability is
  // sigmoid(slip_sharpness * (jerk - slip_threshold)), so the failure rate
  // rises smoothly with commanded-action jerk.
  double slip_threshold = 1.10;
  double slip_sharpness = 5.8;
  double action_clip = 12.0;
  double dt = 0.1;
  // Episode-level scene randomization: agent and object starts are jittered
  // uniformly in [-scene_jitter, scene_jitter]^2.
  double scene_jitter = 0.25;

  void validate(std::int64_t stride_k) const;
};

// Named slip-threshold regimes. "headroom" leaves room for outcomes to move
// in both directions; "ceiling" saturates baseline success.
EnvConfig env_preset(const std::string& name);

double drop_probability(double jerk, const EnvConfig& config);

// Kinematics shared by the environment and the expert planner: clips the
// action, integrates the point mass (semi-implicit Euler) and applies the
// auto-grasp rule. No slip channel, no termination.
void sim_step_kinematics(EnvState& state, const Vector2d& action, const EnvConfig& config);

// Frozen context: everything needed to regenerate chunks and replay steps
// from this point deterministically.
struct ContextSnapshot {
  EnvState state;
  MatrixXd recent_actions;  // up to 2 most recent commanded actions (oldest first)
  std::uint64_t env_stream = 0;
  std::string context_id;
  std::string source_episode;
  std::int64_t source_t = 0;
  // Indices into the source rollout's seed streams, so reference noises can
  // be reconstructed exactly.
  std::uint64_t source_episode_index = 0;
  std::int64_t source_chunk_index = 0;
};

// Single-owner mutable environment instance.
class Env {
 public:
  Env(const EnvConfig& config, Rng rng);

  // Fresh episode with scene jitter drawn from `scene_rng`.
  void reset(Rng& scene_rng);
  // Restore from a snapshot; the hazard stream restarts from `rng`.
  void restore(const ContextSnapshot& snapshot, Rng rng);

  // Executes one commanded action. Returns contact = carrying during the
  // step. Call only while !terminated().
  bool step(const Vector2d& action);

  bool terminated() const;
  bool succeeded() const { return succeeded_; }
  const EnvState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }
  // Most recent commanded actions, oldest first (0..2 rows).
  MatrixXd recent_actions() const;

  ContextSnapshot snapshot(std::string context_id, std::string source_episode,
                           std::uint64_t env_stream) const;

 private:
  EnvConfig config_;
  EnvState state_;
  Rng rng_;
  bool succeeded_ = false;
  std::optional<Vector2d> prev_action_;
  std::optional<Vector2d> prev_prev_action_;
};

}  // namespace chunkseam::sim
