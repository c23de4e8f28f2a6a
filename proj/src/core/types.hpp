#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace chunkseam {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

// Steering applied to one chunk's latent noise: shift magnitude and the id
// of the unit direction that was used.
struct SteeringTag {
  double alpha = 0.0;
  std::string direction_id;
};

// One generated chunk of future actions (horizon rows x action-dim columns).
struct ActionChunk {
  MatrixXd actions;  // H x D
  std::int64_t chunk_index = 0;
  std::string context_id;
  std::string noise_id;

  std::int64_t horizon() const { return actions.rows(); }
  std::int64_t dim() const { return actions.cols(); }
  void validate() const;
};

// Bookkeeping for the chunk that produced a run of executed steps.
struct ChunkRecord {
  std::int64_t chunk_index = 0;
  std::string context_id;
  std::string noise_id;
  std::optional<SteeringTag> steering;
};

// Executed trajectory of one episode. Chunk boundaries sit exactly at
// t = 0, K, 2K, ...; step t belongs to chunk t / K. `phase_offset` carries
// the convention for externally recorded data whose first boundary is not
// at t = 0: phase(t) = (t - phase_offset) mod K.
struct RolloutTrace {
  MatrixXd executed;  // T x D
  std::int64_t stride_k = 0;
  std::int64_t horizon_h = 0;
  std::vector<ChunkRecord> chunk_records;
  std::optional<std::vector<std::uint8_t>> contact_mask;  // length T when present
  bool success = false;
  bool valid = true;
  std::string episode_id;
  std::string source = "testbed";  // testbed | external
  SeedRecord seed;
  std::string config_hash;
  std::int64_t phase_offset = 0;

  std::int64_t steps() const { return executed.rows(); }
  std::int64_t dim() const { return executed.cols(); }
  std::int64_t phase(std::int64_t t) const {
    std::int64_t p = (t - phase_offset) % stride_k;
    return p < 0 ? p + stride_k : p;
  }
  bool has_contact_mask() const { return contact_mask.has_value(); }
  // Throws on any structural violation (empty trace, stride/horizon
  // mismatch, mask length, non-finite entries, step->chunk coverage).
  void validate() const;
};

// Phase-resolved mean jerk over one replanning cycle. A phase with zero
// count is absent (mean stored as NaN), never silently zero.
struct PhaseProfile {
  std::vector<double> mean_jerk_by_phase;   // length K, NaN where absent
  std::vector<std::int64_t> counts_by_phase;  // length K

  std::int64_t cycle_length() const {
    return static_cast<std::int64_t>(counts_by_phase.size());
  }
  bool present(std::int64_t phase) const {
    return counts_by_phase[static_cast<std::size_t>(phase)] > 0;
  }
  std::int64_t total_count() const;
};

// Scalar artifact metrics for one rollout window or one boundary probe.
// For episode windows `boundary_transition_jerk` is the mean jerk over the
// boundary-phase-0 timesteps in the window; for a two-chunk probe it is the
// jerk at the stitch itself.
struct ArtifactSummary {
  double jerk_contrast = 0.0;
  double boundary_transition_jerk = 0.0;
  PhaseProfile phase_profile;
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;
};

// Half-open timestep range [start, end).
struct Window {
  std::int64_t start = 0;
  std::int64_t end = 0;

  std::int64_t length() const { return end - start; }
};

}  // namespace chunkseam
