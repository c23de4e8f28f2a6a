#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/types.hpp"
#include "sim/env.hpp"

namespace chunkseam::sim {

// Latent input to the chunk generator. When a vector has been steered, the
// pre-steering base and the direction are kept so that repeated steering
// along the same direction composes exactly (base + total_alpha * d).
struct NoiseVector {
  VectorXd values;
  std::string noise_id;
  SeedRecord seed;
  // Steering provenance.
  std::optional<VectorXd> steer_base;
  std::optional<VectorXd> steer_direction;
  std::string steer_direction_id;
  double steer_alpha = 0.0;

  std::int64_t length() const { return values.size(); }
};

// Unit direction in noise space, with the provenance of how it was chosen.
// Polarity convention: positive alpha increases the artifact metric.
struct SteeringDirection {
  VectorXd direction;
  std::string direction_id;
  std::string context_id;
  std::int64_t candidate_index = -1;
  double selection_score = 0.0;
  bool degenerate = false;

  void validate() const;
};

NoiseVector steer(const NoiseVector& z, const SteeringDirection& d, double alpha);

struct PolicyConfig {
  // Scale of the noise- and context-dependent deviation from the expert
  // plan. Zero makes the generator deterministic.
  double deviation_scale = 0.11;
  // Number of frozen random-feature components in the context coupling.
  std::int64_t coupling_rank = 3;
  // Euler steps for the straight-line velocity-field integration. The field
  // is exactly integrable, so this only exercises sampler plumbing.
  std::int64_t flow_steps = 8;
  // Expert controller: critically damped proportional gain, clamp on the
  // position error magnitude, and the transport-target ramp rate (1/s) used
  // after grasping.
  double expert_kp = 6.0;
  double expert_error_clamp = 0.6;
  double transport_ramp = 1.45;
  // Context-dependent systematic deviation component, in units of the
  // noise-driven one. This is what gives chunk transitions a repeatable
  // discontinuity that steering can push against.
  double bias_scale = 1.23;
  // > 0 bends the deviation map with tanh(gain * x) / gain; 0 keeps it
  // affine in the latent (exact linear oracles apply only in that case).
  double tanh_gain = 0.0;
  std::uint64_t feature_seed = 7;

  void validate() const;
};

// Frozen noise-conditioned chunk generator over a fixed expert plan.
// Immutable after construction; generate_chunk is a pure function of
// (context, z, config).
class Policy {
 public:
  Policy(const PolicyConfig& config, const EnvConfig& env_config, std::int64_t horizon);

  std::int64_t horizon() const { return horizon_; }
  std::int64_t action_dim() const { return kActionDim; }
  std::int64_t latent_dim() const { return horizon_ * kActionDim; }
  const PolicyConfig& config() const { return config_; }

  // Expert chunk: forward simulation of the proportional controller from the
  // context state (pickup target first, ramped transport target once
  // carrying). Rows are post-clip commanded actions.
  MatrixXd expert_plan(const EnvState& context_state) const;

  // Deviation added to the expert plan for latent z brought in through the
  // frozen context coupling; affine in z unless tanh_gain > 0.
  MatrixXd deviation(const EnvState& context_state, const VectorXd& z) const;

  ActionChunk generate_chunk(const ContextSnapshot& context, const NoiseVector& z) const;

  // Fresh standard-normal latent drawn from `rng`.
  NoiseVector draw_noise(Rng& rng, std::string noise_id, SeedRecord seed) const;

  static constexpr std::int64_t kActionDim = 2;
  static constexpr std::int64_t kTemporalBasis = 1;

 private:
  VectorXd context_features(const EnvState& state) const;
  // Scalar noise gain xi(x, z) and deviation pattern p(x) in temporal-basis
  // space. The deviation coefficients are (bias_scale + xi) * p, so latent
  // noise modulates the amplitude of a context-systematic deviation shape.
  double noise_gain(const VectorXd& psi, const VectorXd& z) const;
  VectorXd deviation_pattern(const VectorXd& psi) const;

  PolicyConfig config_;
  EnvConfig env_config_;
  std::int64_t horizon_;
  // Frozen random features: per component, a weight vector over the context
  // embedding and a phase; per component, a latent direction and a pattern
  // coefficient vector in temporal-basis space.
  std::vector<VectorXd> feature_w_;
  std::vector<double> feature_b_;
  std::vector<VectorXd> noise_dirs_;     // length L each
  std::vector<VectorXd> pattern_coeff_;  // (kTemporalBasis * D) each
};

}  // namespace chunkseam::sim
