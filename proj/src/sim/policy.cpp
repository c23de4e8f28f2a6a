#include "sim/policy.hpp"

#include <cmath>

#include "core/error.hpp"

namespace chunkseam::sim {

namespace {

// Context embedding scales. Scene identity (object_home) is deliberately
// short-lengthscale so the coupling varies strongly across episodes, while
// agent state is long-lengthscale so it drifts slowly within an episode and
// steering directions stay useful across boundaries.
constexpr double kScaleAgentPos = 0.08;
constexpr double kScaleAgentVel = 0.05;
constexpr double kScaleScene = 4.0;
constexpr double kScaleCarry = 0.15;
constexpr std::int64_t kContextDim = 7;

}  // namespace

void SteeringDirection::validate() const {
  if (std::abs(direction.norm() - 1.0) > 1e-9) {
    throw_error(ErrorCode::invalid_argument, "steering direction must be unit length");
  }
}

NoiseVector steer(const NoiseVector& z, const SteeringDirection& d, double alpha) {
  if (d.direction.size() != z.values.size()) {
    throw_error(ErrorCode::invalid_argument, "steering direction length mismatch");
  }
  NoiseVector out = z;
  if (z.steer_base && z.steer_direction_id == d.direction_id) {
    out.steer_alpha = z.steer_alpha + alpha;
  } else {
    out.steer_base = z.values;
    out.steer_direction = d.direction;
    out.steer_direction_id = d.direction_id;
    out.steer_alpha = alpha;
  }
  out.values = *out.steer_base + out.steer_alpha * (*out.steer_direction);
  return out;
}

void PolicyConfig::validate() const {
  if (deviation_scale < 0.0) {
    throw_error(ErrorCode::config, "deviation_scale must be >= 0");
  }
  if (coupling_rank < 1) {
    throw_error(ErrorCode::config, "coupling_rank must be >= 1");
  }
  if (flow_steps < 1) {
    throw_error(ErrorCode::config, "flow_steps must be >= 1");
  }
  if (expert_kp <= 0.0 || expert_error_clamp <= 0.0 || transport_ramp <= 0.0) {
    throw_error(ErrorCode::config, "expert gains must be positive");
  }
  if (bias_scale < 0.0 || tanh_gain < 0.0) {
    throw_error(ErrorCode::config, "bias_scale and tanh_gain must be >= 0");
  }
}

Policy::Policy(const PolicyConfig& config, const EnvConfig& env_config,
               std::int64_t horizon)
    : config_(config), env_config_(env_config), horizon_(horizon) {
  config.validate();
  if (horizon < 2) {
    throw_error(ErrorCode::invalid_argument, "policy horizon must be >= 2");
  }
  std::int64_t latent = latent_dim();
  std::int64_t coeff_dim = kTemporalBasis * kActionDim;
  Rng rng = Rng::derive(config.feature_seed, "policy-features");
  double scale = 1.0 / std::sqrt(static_cast<double>(latent));
  for (std::int64_t i = 0; i < config.coupling_rank; ++i) {
    VectorXd w(kContextDim);
    for (std::int64_t j = 0; j < kContextDim; ++j) {
      w[j] = rng.next_normal();
    }
    feature_w_.push_back(w);
    feature_b_.push_back(2.0 * M_PI * rng.next_double());
    VectorXd v(latent);
    for (std::int64_t c = 0; c < latent; ++c) {
      v[c] = scale * rng.next_normal();
    }
    noise_dirs_.push_back(v);
    VectorXd q(coeff_dim);
    for (std::int64_t r = 0; r < coeff_dim; ++r) {
      q[r] = rng.next_normal();
    }
    pattern_coeff_.push_back(q);
  }
}

double Policy::noise_gain(const VectorXd& psi, const VectorXd& z) const {
  double xi = 0.0;
  for (std::int64_t i = 0; i < config_.coupling_rank; ++i) {
    xi += psi[i] * noise_dirs_[static_cast<std::size_t>(i)].dot(z);
  }
  return xi;
}

VectorXd Policy::deviation_pattern(const VectorXd& psi) const {
  VectorXd p = VectorXd::Zero(kTemporalBasis * kActionDim);
  for (std::int64_t i = 0; i < config_.coupling_rank; ++i) {
    p += psi[i] * pattern_coeff_[static_cast<std::size_t>(i)];
  }
  return p;
}

VectorXd Policy::context_features(const EnvState& state) const {
  VectorXd xi(kContextDim);
  xi << kScaleAgentPos * state.agent_pos[0], kScaleAgentPos * state.agent_pos[1],
      kScaleAgentVel * state.agent_vel[0], kScaleAgentVel * state.agent_vel[1],
      kScaleScene * state.object_home[0], kScaleScene * state.object_home[1],
      kScaleCarry * (state.carrying ? 1.0 : 0.0);
  VectorXd psi(config_.coupling_rank);
  for (std::int64_t i = 0; i < config_.coupling_rank; ++i) {
    psi[i] = std::cos(feature_w_[static_cast<std::size_t>(i)].dot(xi) +
                      feature_b_[static_cast<std::size_t>(i)]);
  }
  return psi;
}

MatrixXd Policy::expert_plan(const EnvState& context_state) const {
  EnvState state = context_state;
  MatrixXd plan(horizon_, kActionDim);
  double kp = config_.expert_kp;
  double kd = 2.0 * std::sqrt(kp);  // critical damping
  for (std::int64_t h = 0; h < horizon_; ++h) {
    Vector2d target;
    if (state.carrying) {
      double tau = static_cast<double>(state.step_index - state.grasp_step) *
                   env_config_.dt;
      // Second-order lag: zero initial slope, so the transport target pulls
      // away from the pickup point without a command discontinuity.
      double x = config_.transport_ramp * tau;
      double blend = 1.0 - (1.0 + x) * std::exp(-x);
      target = state.object_home + blend * (env_config_.goal - state.object_home);
    } else {
      target = state.object_pos;
    }
    Vector2d err = target - state.agent_pos;
    double err_norm = err.norm();
    if (err_norm > config_.expert_error_clamp) {
      err *= config_.expert_error_clamp / err_norm;
    }
    Vector2d action = kp * err - kd * state.agent_vel;
    action = action.cwiseMax(-env_config_.action_clip).cwiseMin(env_config_.action_clip);
    plan.row(h) = action;
    sim_step_kinematics(state, action, env_config_);
    state.step_index += 1;
  }
  return plan;
}

MatrixXd Policy::deviation(const EnvState& context_state, const VectorXd& z) const {
  if (z.size() != latent_dim()) {
    throw_error(ErrorCode::invalid_argument,
                "latent length " + std::to_string(z.size()) + " != " +
                    std::to_string(latent_dim()));
  }
  VectorXd psi = context_features(context_state);
  VectorXd coeff = (config_.bias_scale + noise_gain(psi, z)) * deviation_pattern(psi);
  MatrixXd dev(horizon_, kActionDim);
  // Centered ramp over each half-horizon. Zero-sum over the executed
  // prefix, so the deviation injects no net velocity and stays affine in h
  // (no interior jerk of its own); the ramp edges make consecutive chunks
  // stitch discontinuously, which is where the artifact lives.
  std::int64_t half = std::max<std::int64_t>(horizon_ / 2, 2);
  double norm = 0.0;
  for (std::int64_t h = 0; h < half; ++h) {
    double v = static_cast<double>(h) - static_cast<double>(half - 1) / 2.0;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (std::int64_t h = 0; h < horizon_; ++h) {
    double ramp = (static_cast<double>(h % half) -
                   static_cast<double>(half - 1) / 2.0) /
                  norm;
    for (std::int64_t d = 0; d < kActionDim; ++d) {
      double raw = ramp * coeff[d];
      if (config_.tanh_gain > 0.0) {
        raw = std::tanh(config_.tanh_gain * raw) / config_.tanh_gain;
      }
      dev(h, d) = config_.deviation_scale * raw;
    }
  }
  return dev;
}

ActionChunk Policy::generate_chunk(const ContextSnapshot& context,
                                   const NoiseVector& z) const {
  MatrixXd target = expert_plan(context.state) + deviation(context.state, z.values);
  // Straight-line velocity field from the reshaped latent to the target.
  // The field is constant along the path, so every Euler step lands exactly
  // on the line; tracking positions on the line keeps the endpoint free of
  // step-count rounding (the final factor is exactly zero).
  MatrixXd start(horizon_, kActionDim);
  for (std::int64_t h = 0; h < horizon_; ++h) {
    for (std::int64_t d = 0; d < kActionDim; ++d) {
      start(h, d) = z.values[h * kActionDim + d];
    }
  }
  MatrixXd sample = start;
  for (std::int64_t s = 1; s <= config_.flow_steps; ++s) {
    double remaining = 1.0 - static_cast<double>(s) / static_cast<double>(config_.flow_steps);
    sample = target + remaining * (start - target);
  }
  ActionChunk chunk;
  chunk.actions = sample;
  chunk.context_id = context.context_id;
  chunk.noise_id = z.noise_id;
  return chunk;
}

NoiseVector Policy::draw_noise(Rng& rng, std::string noise_id, SeedRecord seed) const {
  NoiseVector z;
  z.values.resize(latent_dim());
  for (std::int64_t i = 0; i < latent_dim(); ++i) {
    z.values[i] = rng.next_normal();
  }
  z.noise_id = std::move(noise_id);
  z.seed = seed;
  return z;
}

}  // namespace chunkseam::sim
