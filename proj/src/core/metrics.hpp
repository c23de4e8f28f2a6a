#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "core/types.hpp"

namespace chunkseam::metrics {

// Control window used when summarizing an episode.
enum class ControlWindow {
  all,
  contact_free,
  contact_free_first_n,
};

struct ControlOptions {
  ControlWindow window = ControlWindow::all;
  // First-N cap for contact_free_first_n.
  std::int64_t first_n = 50;
  // Steps within +/- guard_margin of any contact-mask transition are
  // excluded from contact-free windows ("near contact" is a soft notion, so
  // the margin is configurable).
  std::int64_t guard_margin = 2;
};

const char* control_window_name(ControlWindow w);
ControlWindow control_window_from_name(const std::string& name);

// Jerk at timestep t: L2 norm of the second finite difference
// a_t - 2 a_{t-1} + a_{t-2} of the executed actions. Undefined for t < 2.
double jerk_at(const MatrixXd& actions, std::int64_t t);

// Jerk series over a contiguous window. Only timesteps with t >= 2 produce a
// value; each j_t uses rows t-2..t even when t-1, t-2 fall outside the
// window. Windows shorter than 3 steps are rejected (empty-series error).
std::vector<std::pair<std::int64_t, double>> jerk_series(const RolloutTrace& trace,
                                                         Window window);

// Phase-binned mean jerk over the timesteps selected by `include`
// (length T). Requires K >= 4 so the default boundary {0,1} and interior
// {2..K-1} phase sets are both nonempty.
PhaseProfile phase_profile_masked(const RolloutTrace& trace,
                                  const std::vector<std::uint8_t>& include);
PhaseProfile phase_profile(const RolloutTrace& trace, Window window);

// Mean jerk over boundary phases minus mean jerk over interior phases.
// Phase sets default to B = {0, 1}, I = {2, ..., K-1}. Throws if any
// requested phase is absent from the profile.
double jerk_contrast(const PhaseProfile& profile,
                     const std::vector<std::int64_t>& boundary_phases,
                     const std::vector<std::int64_t>& interior_phases);
double jerk_contrast(const PhaseProfile& profile);

std::vector<std::int64_t> default_boundary_phases();
std::vector<std::int64_t> default_interior_phases(std::int64_t stride_k);

// Jerk exactly at a chunk boundary timestep (a multiple of K, >= 2).
double boundary_transition_jerk(const RolloutTrace& trace, std::int64_t boundary_t);

// Timestep selection for a control window, exposed for tests and reporting.
// The mask marks jerk timesteps t (t >= 2 filtering happens in binning).
std::vector<std::uint8_t> control_mask(const RolloutTrace& trace,
                                       const ControlOptions& options);

// Phase profile + contrast + mean boundary jerk over a control window.
ArtifactSummary episode_contrast(const RolloutTrace& trace,
                                 const ControlOptions& options);

// Truncates every trace to the common minimum length so groups of episodes
// are comparable at matched horizon. Idempotent.
std::vector<RolloutTrace> matched_horizon_truncate(const std::vector<RolloutTrace>& traces);

// Summary over an explicit two-chunk stitched window: `prefix` rows followed
// by `head` rows, stride K. Used by boundary probes and live direction
// search; the stitch sits at t = prefix.rows().
ArtifactSummary stitched_window_summary(const MatrixXd& prefix, const MatrixXd& head,
                                        std::int64_t stride_k);

}  // namespace chunkseam::metrics
