#include "sim/rollout.hpp"

#include <algorithm>
#include <cstdio>

#include "core/error.hpp"
#include "core/metrics.hpp"

namespace chunkseam::sim {

namespace {

std::string format_episode_id(std::uint64_t episode_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ep%04llu",
                static_cast<unsigned long long>(episode_index));
  return buf;
}

}  // namespace

MatrixXd clip_actions(const MatrixXd& actions, double bound) {
  return actions.cwiseMax(-bound).cwiseMin(bound);
}

RolloutResult rollout(const Policy& policy, const EnvConfig& env_config,
                      std::int64_t stride_k, std::uint64_t root_seed,
                      std::uint64_t episode_index, const ChunkNoiseHook& hook) {
  if (stride_k < 1 || stride_k > policy.horizon()) {
    throw_error(ErrorCode::invalid_argument, "rollout needs 1 <= K <= H");
  }
  env_config.validate(stride_k);

  RolloutResult result;
  RolloutTrace& trace = result.trace;
  trace.stride_k = stride_k;
  trace.horizon_h = policy.horizon();
  trace.episode_id = format_episode_id(episode_index);
  trace.seed = SeedRecord{root_seed, episode_index};

  Rng scene_rng = Rng::derive(root_seed, "scene", episode_index);
  Env env(env_config, Rng::derive(root_seed, "env", episode_index));
  env.reset(scene_rng);

  std::int64_t d = policy.action_dim();
  MatrixXd executed(env_config.max_steps, d);
  std::vector<std::uint8_t> contact;
  contact.reserve(static_cast<std::size_t>(env_config.max_steps));

  std::int64_t t = 0;
  std::int64_t chunk_index = 0;
  while (!env.terminated()) {
    char ctx_buf[32];
    std::snprintf(ctx_buf, sizeof(ctx_buf), "b%03lld",
                  static_cast<long long>(chunk_index));
    ContextSnapshot snap =
        env.snapshot(trace.episode_id + "/" + ctx_buf, trace.episode_id,
                     Rng::derive_seed(root_seed, "ctx", episode_index,
                                      static_cast<std::uint64_t>(chunk_index)));
    snap.source_episode_index = episode_index;
    snap.source_chunk_index = chunk_index;
    Rng noise_rng = Rng::derive(root_seed, "noise", episode_index,
                                static_cast<std::uint64_t>(chunk_index));
    NoiseVector raw = policy.draw_noise(
        noise_rng, snap.context_id + "/z", SeedRecord{root_seed, episode_index});

    NoiseDecision decision;
    if (hook) {
      decision = hook(chunk_index, snap, std::move(raw), executed.topRows(t));
      result.fallback_flagged = result.fallback_flagged || decision.fallback_flagged;
    } else {
      decision.z = std::move(raw);
    }

    ActionChunk chunk;
    try {
      chunk = policy.generate_chunk(snap, decision.z);
      chunk.chunk_index = chunk_index;
      chunk.validate();
    } catch (const Error&) {
      trace.valid = false;
      break;
    }

    result.snapshots.push_back(std::move(snap));
    ChunkRecord record;
    record.chunk_index = chunk_index;
    record.context_id = result.snapshots.back().context_id;
    record.noise_id = decision.z.noise_id;
    record.steering = decision.tag;
    trace.chunk_records.push_back(std::move(record));

    for (std::int64_t h = 0; h < stride_k && !env.terminated(); ++h) {
      Vector2d action = chunk.actions.row(h);
      bool touched = env.step(action);
      executed.row(t) = clip_actions(chunk.actions.row(h), env_config.action_clip);
      contact.push_back(touched ? 1 : 0);
      ++t;
    }
    ++chunk_index;
  }

  trace.executed = executed.topRows(t);
  trace.contact_mask = std::move(contact);
  trace.success = env.succeeded();
  if (trace.valid && t >= stride_k) {
    trace.validate();
  }
  return result;
}

ProbeResult first_boundary_probe(const ContextSnapshot& context, const NoiseVector& z0,
                                 const NoiseVector& z1, const Policy& policy,
                                 const EnvConfig& env_config, std::int64_t stride_k) {
  if (stride_k < 1 || stride_k > policy.horizon()) {
    throw_error(ErrorCode::invalid_argument, "probe needs 1 <= K <= H");
  }
  ProbeResult result;
  ActionChunk c0 = policy.generate_chunk(context, z0);

  Env env(env_config, Rng(0));
  env.restore(context, Rng::derive(context.env_stream, "probe"));
  for (std::int64_t h = 0; h < stride_k; ++h) {
    if (env.terminated()) {
      return result;  // invalid: episode ended inside the prefix
    }
    env.step(c0.actions.row(h));
  }
  if (env.terminated()) {
    return result;
  }

  ContextSnapshot successor =
      env.snapshot(context.context_id + "+K", context.source_episode,
                   Rng::derive_seed(context.env_stream, "probe-successor"));
  ActionChunk c1 = policy.generate_chunk(successor, z1);

  MatrixXd prefix = clip_actions(c0.actions.topRows(stride_k), env_config.action_clip);
  MatrixXd head = clip_actions(c1.actions.topRows(stride_k), env_config.action_clip);
  result.summary = metrics::stitched_window_summary(prefix, head, stride_k);
  result.valid = true;
  return result;
}

std::vector<ContextSnapshot> snapshot_contexts(const std::vector<RolloutResult>& rollouts,
                                               std::int64_t n_contexts) {
  if (rollouts.empty()) {
    throw_error(ErrorCode::invalid_argument, "snapshot selection needs >= 1 rollout");
  }
  if (n_contexts < 1) {
    throw_error(ErrorCode::invalid_argument, "snapshot selection needs n_contexts >= 1");
  }
  std::vector<std::vector<const ContextSnapshot*>> strata(3);
  for (const auto& rollout_result : rollouts) {
    std::int64_t episode_len = rollout_result.trace.steps();
    for (const auto& snap : rollout_result.snapshots) {
      int stratum = 0;
      if (3 * snap.source_t >= 2 * episode_len) {
        stratum = 2;
      } else if (3 * snap.source_t >= episode_len) {
        stratum = 1;
      }
      strata[static_cast<std::size_t>(stratum)].push_back(&snap);
    }
  }
  std::size_t available = strata[0].size() + strata[1].size() + strata[2].size();
  if (available < static_cast<std::size_t>(n_contexts)) {
    throw_error(ErrorCode::runner,
                "requested " + std::to_string(n_contexts) +
                    " contexts but only " + std::to_string(available) +
                    " boundary snapshots are available");
  }
  std::vector<ContextSnapshot> selected;
  std::array<std::size_t, 3> cursor{0, 0, 0};
  int stratum = 0;
  while (selected.size() < static_cast<std::size_t>(n_contexts)) {
    auto s = static_cast<std::size_t>(stratum);
    if (cursor[s] < strata[s].size()) {
      selected.push_back(*strata[s][cursor[s]]);
      ++cursor[s];
    }
    stratum = (stratum + 1) % 3;
  }
  return selected;
}

}  // namespace chunkseam::sim
