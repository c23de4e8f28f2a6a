#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/types.hpp"
#include "sim/env.hpp"
#include "sim/policy.hpp"

namespace chunkseam::sim {

// Noise decided for one chunk: possibly steered latent plus bookkeeping.
struct NoiseDecision {
  NoiseVector z;
  std::optional<SteeringTag> tag;
  bool fallback_flagged = false;
};

// Called at every chunk boundary before generation; default passes the raw
// draw through. `executed` holds all steps executed so far (t rows).
using ChunkNoiseHook = std::function<NoiseDecision(
    std::int64_t chunk_index, const ContextSnapshot& context, NoiseVector raw,
    const MatrixXd& executed)>;

struct RolloutResult {
  RolloutTrace trace;
  std::vector<ContextSnapshot> snapshots;  // one per generated chunk
  bool fallback_flagged = false;
};

// Receding-horizon execution: snapshot context, draw (or steer) noise,
// generate a chunk, execute its first K actions, repeat until the episode
// terminates. Deterministic given (configs, root_seed, episode_index).
RolloutResult rollout(const Policy& policy, const EnvConfig& env_config,
                      std::int64_t stride_k, std::uint64_t root_seed,
                      std::uint64_t episode_index, const ChunkNoiseHook& hook = {});

// Boundary probe outcome; `valid` is false when the environment terminated
// while executing the first chunk's prefix.
struct ProbeResult {
  bool valid = false;
  ArtifactSummary summary;
};

// Two-chunk stitch experiment at a frozen context: generate chunk c0 from
// (context, z0), execute its first K actions to reach the successor context,
// generate c1 from there with z1, and measure the boundary metrics of the
// stitched 2K-step window.
ProbeResult first_boundary_probe(const ContextSnapshot& context, const NoiseVector& z0,
                                 const NoiseVector& z1, const Policy& policy,
                                 const EnvConfig& env_config, std::int64_t stride_k);

// Deterministic stratified selection of boundary contexts from reference
// rollouts: snapshots are classified into early/mid/late thirds of their
// episode and picked round-robin. Throws (naming the available count) when
// fewer than `n_contexts` snapshots exist.
std::vector<ContextSnapshot> snapshot_contexts(const std::vector<RolloutResult>& rollouts,
                                               std::int64_t n_contexts);

MatrixXd clip_actions(const MatrixXd& actions, double bound);

}  // namespace chunkseam::sim
