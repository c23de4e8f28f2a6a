#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/error.hpp"

namespace chunkseam::metrics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_window(const RolloutTrace& trace, Window window) {
  if (window.start < 0 || window.end > trace.steps() || window.start > window.end) {
    throw_error(ErrorCode::invalid_argument,
                "window [" + std::to_string(window.start) + ", " +
                    std::to_string(window.end) + ") outside trace of length " +
                    std::to_string(trace.steps()));
  }
}

void check_stride_for_phases(std::int64_t stride_k) {
  if (stride_k < 4) {
    throw_error(ErrorCode::invalid_argument,
                "phase binning requires stride K >= 4, got " + std::to_string(stride_k));
  }
}

}  // namespace

const char* control_window_name(ControlWindow w) {
  switch (w) {
    case ControlWindow::all:
      return "all";
    case ControlWindow::contact_free:
      return "contact_free";
    case ControlWindow::contact_free_first_n:
      return "contact_free_first_n";
  }
  return "unknown";
}

ControlWindow control_window_from_name(const std::string& name) {
  if (name == "all") return ControlWindow::all;
  if (name == "contact_free") return ControlWindow::contact_free;
  if (name == "contact_free_first_n") return ControlWindow::contact_free_first_n;
  throw_error(ErrorCode::config, "unknown control window '" + name + "'");
}

double jerk_at(const MatrixXd& actions, std::int64_t t) {
  return (actions.row(t) - 2.0 * actions.row(t - 1) + actions.row(t - 2)).norm();
}

std::vector<std::pair<std::int64_t, double>> jerk_series(const RolloutTrace& trace,
                                                         Window window) {
  check_window(trace, window);
  if (window.length() < 3) {
    throw_error(ErrorCode::invalid_argument,
                "jerk series window must span at least 3 steps, got " +
                    std::to_string(window.length()));
  }
  std::vector<std::pair<std::int64_t, double>> series;
  for (std::int64_t t = std::max<std::int64_t>(window.start, 2); t < window.end; ++t) {
    series.emplace_back(t, jerk_at(trace.executed, t));
  }
  return series;
}

PhaseProfile phase_profile_masked(const RolloutTrace& trace,
                                  const std::vector<std::uint8_t>& include) {
  check_stride_for_phases(trace.stride_k);
  if (static_cast<std::int64_t>(include.size()) != trace.steps()) {
    throw_error(ErrorCode::invalid_argument, "include mask length != trace steps");
  }
  std::int64_t k = trace.stride_k;
  std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
  for (std::int64_t t = 2; t < trace.steps(); ++t) {
    if (!include[static_cast<std::size_t>(t)]) {
      continue;
    }
    auto p = static_cast<std::size_t>(trace.phase(t));
    sums[p] += jerk_at(trace.executed, t);
    counts[p] += 1;
  }
  PhaseProfile profile;
  profile.counts_by_phase = counts;
  profile.mean_jerk_by_phase.resize(static_cast<std::size_t>(k), kNaN);
  for (std::size_t p = 0; p < sums.size(); ++p) {
    if (counts[p] > 0) {
      profile.mean_jerk_by_phase[p] = sums[p] / static_cast<double>(counts[p]);
    }
  }
  return profile;
}

PhaseProfile phase_profile(const RolloutTrace& trace, Window window) {
  check_window(trace, window);
  std::vector<std::uint8_t> include(static_cast<std::size_t>(trace.steps()), 0);
  for (std::int64_t t = window.start; t < window.end; ++t) {
    include[static_cast<std::size_t>(t)] = 1;
  }
  return phase_profile_masked(trace, include);
}

std::vector<std::int64_t> default_boundary_phases() { return {0, 1}; }

std::vector<std::int64_t> default_interior_phases(std::int64_t stride_k) {
  std::vector<std::int64_t> interior;
  for (std::int64_t p = 2; p < stride_k; ++p) {
    interior.push_back(p);
  }
  return interior;
}

double jerk_contrast(const PhaseProfile& profile,
                     const std::vector<std::int64_t>& boundary_phases,
                     const std::vector<std::int64_t>& interior_phases) {
  if (boundary_phases.empty() || interior_phases.empty()) {
    throw_error(ErrorCode::invalid_argument, "contrast phase sets must be nonempty");
  }
  auto mean_over = [&](const std::vector<std::int64_t>& phases, const char* which) {
    double sum = 0.0;
    for (auto p : phases) {
      if (p < 0 || p >= profile.cycle_length()) {
        throw_error(ErrorCode::invalid_argument,
                    std::string(which) + " phase " + std::to_string(p) +
                        " outside cycle of length " +
                        std::to_string(profile.cycle_length()));
      }
      if (!profile.present(p)) {
        throw_error(ErrorCode::invalid_argument,
                    "contrast undefined: " + std::string(which) + " phase " +
                        std::to_string(p) + " has no samples");
      }
      sum += profile.mean_jerk_by_phase[static_cast<std::size_t>(p)];
    }
    return sum / static_cast<double>(phases.size());
  };
  return mean_over(boundary_phases, "boundary") - mean_over(interior_phases, "interior");
}

double jerk_contrast(const PhaseProfile& profile) {
  return jerk_contrast(profile, default_boundary_phases(),
                       default_interior_phases(profile.cycle_length()));
}

double boundary_transition_jerk(const RolloutTrace& trace, std::int64_t boundary_t) {
  if (trace.phase(boundary_t) != 0) {
    throw_error(ErrorCode::invalid_argument,
                "timestep " + std::to_string(boundary_t) + " is not a chunk boundary");
  }
  if (boundary_t < 2 || boundary_t >= trace.steps()) {
    throw_error(ErrorCode::invalid_argument,
                "boundary transition jerk needs 2 <= t < T, got " +
                    std::to_string(boundary_t));
  }
  return jerk_at(trace.executed, boundary_t);
}

std::vector<std::uint8_t> control_mask(const RolloutTrace& trace,
                                       const ControlOptions& options) {
  auto t_count = static_cast<std::size_t>(trace.steps());
  std::vector<std::uint8_t> include(t_count, 1);
  if (options.window == ControlWindow::all) {
    return include;
  }
  if (!trace.has_contact_mask()) {
    throw_error(ErrorCode::capability,
                "trace '" + trace.episode_id +
                    "' has no contact mask; contact-free controls unavailable");
  }
  const auto& contact = *trace.contact_mask;
  for (std::size_t t = 0; t < t_count; ++t) {
    include[t] = contact[t] ? 0 : 1;
  }
  // Drop a guard margin around every contact transition.
  for (std::size_t t = 1; t < t_count; ++t) {
    if (contact[t] != contact[t - 1]) {
      std::int64_t lo = static_cast<std::int64_t>(t) - options.guard_margin;
      std::int64_t hi = static_cast<std::int64_t>(t) + options.guard_margin;
      for (std::int64_t u = std::max<std::int64_t>(lo, 0);
           u <= hi && u < static_cast<std::int64_t>(t_count); ++u) {
        include[static_cast<std::size_t>(u)] = 0;
      }
    }
  }
  if (options.window == ControlWindow::contact_free_first_n) {
    std::int64_t kept = 0;
    for (std::size_t t = 0; t < t_count; ++t) {
      if (!include[t]) {
        continue;
      }
      if (kept >= options.first_n) {
        include[t] = 0;
      } else {
        ++kept;
      }
    }
  }
  return include;
}

ArtifactSummary episode_contrast(const RolloutTrace& trace,
                                 const ControlOptions& options) {
  auto include = control_mask(trace, options);
  std::int64_t first = -1;
  std::int64_t last = -1;
  for (std::int64_t t = 0; t < trace.steps(); ++t) {
    if (include[static_cast<std::size_t>(t)]) {
      if (first < 0) first = t;
      last = t;
    }
  }
  if (first < 0) {
    throw_error(ErrorCode::invalid_argument,
                "episode summary undefined: control window '" +
                    std::string(control_window_name(options.window)) +
                    "' selects no timesteps");
  }
  ArtifactSummary summary;
  summary.phase_profile = phase_profile_masked(trace, include);
  summary.jerk_contrast = jerk_contrast(summary.phase_profile);
  double boundary_sum = 0.0;
  std::int64_t boundary_count = 0;
  for (std::int64_t t = 2; t < trace.steps(); ++t) {
    if (include[static_cast<std::size_t>(t)] && trace.phase(t) == 0) {
      boundary_sum += jerk_at(trace.executed, t);
      ++boundary_count;
    }
  }
  summary.boundary_transition_jerk =
      boundary_count > 0 ? boundary_sum / static_cast<double>(boundary_count) : kNaN;
  summary.window_start = first;
  summary.window_end = last + 1;
  return summary;
}

std::vector<RolloutTrace> matched_horizon_truncate(const std::vector<RolloutTrace>& traces) {
  if (traces.empty()) {
    throw_error(ErrorCode::invalid_argument, "matched-horizon truncation needs >= 1 trace");
  }
  std::int64_t common = traces.front().steps();
  for (const auto& trace : traces) {
    common = std::min(common, trace.steps());
  }
  std::vector<RolloutTrace> out;
  out.reserve(traces.size());
  for (const auto& trace : traces) {
    RolloutTrace cut = trace;
    cut.executed = trace.executed.topRows(common);
    if (trace.contact_mask) {
      cut.contact_mask = std::vector<std::uint8_t>(
          trace.contact_mask->begin(), trace.contact_mask->begin() + common);
    }
    std::int64_t kept_chunks = (common - 1) / trace.stride_k + 1;
    cut.chunk_records.assign(trace.chunk_records.begin(),
                             trace.chunk_records.begin() + kept_chunks);
    out.push_back(std::move(cut));
  }
  return out;
}

ArtifactSummary stitched_window_summary(const MatrixXd& prefix, const MatrixXd& head,
                                        std::int64_t stride_k) {
  if (prefix.cols() != head.cols()) {
    throw_error(ErrorCode::invalid_argument, "stitched window: action dim mismatch");
  }
  if (prefix.rows() < 2) {
    throw_error(ErrorCode::invalid_argument,
                "stitched window: prefix must contain at least 2 actions");
  }
  RolloutTrace window;
  window.executed.resize(prefix.rows() + head.rows(), prefix.cols());
  window.executed << prefix, head;
  window.stride_k = stride_k;
  window.horizon_h = stride_k;
  // Boundaries every K rows; the stitch is at t = prefix.rows(), which must
  // land on phase 0 for the boundary metrics to mean what they say.
  if (prefix.rows() % stride_k != 0) {
    throw_error(ErrorCode::invalid_argument,
                "stitched window: prefix length must be a multiple of the stride");
  }
  ArtifactSummary summary;
  std::vector<std::uint8_t> include(static_cast<std::size_t>(window.executed.rows()), 1);
  summary.phase_profile = phase_profile_masked(window, include);
  summary.jerk_contrast = jerk_contrast(summary.phase_profile);
  summary.boundary_transition_jerk = jerk_at(window.executed, prefix.rows());
  summary.window_start = 0;
  summary.window_end = window.executed.rows();
  return summary;
}

}  // namespace chunkseam::metrics
