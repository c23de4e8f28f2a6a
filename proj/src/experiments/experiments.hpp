#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/metrics.hpp"
#include "core/types.hpp"
#include "sim/env.hpp"
#include "sim/policy.hpp"
#include "sim/rollout.hpp"
#include "stats/stats.hpp"

namespace chunkseam::experiments {

// ---------------------------------------------------------------------------
// Outcome association (success vs failure contrast comparison)

struct ControlRow {
  std::string control;
  std::int64_t n_success = 0;
  std::int64_t n_failure = 0;
  std::int64_t excluded = 0;  // episodes whose window yields no summary
  double success_mean = 0.0;
  double failure_mean = 0.0;
  double delta = 0.0;  // failure_mean - success_mean
  stats::PermutationResult test;
  bool applicable = false;
};

struct TimecoursePoint {
  std::int64_t t = 0;
  double mean_jerk_success = 0.0;
  double mean_jerk_failure = 0.0;
  bool boundary = false;
};

struct OutcomeAssociationReport {
  std::vector<ControlRow> rows;
  std::vector<TimecoursePoint> matched_horizon;
  std::int64_t matched_horizon_length = 0;
  std::int64_t n_episodes = 0;
  std::int64_t n_success = 0;
  std::int64_t n_failure = 0;
  std::int64_t n_invalid = 0;
  bool underpowered = false;  // < 10 episodes or an outcome group empty
  stats::Sidedness sidedness = stats::Sidedness::greater;
  std::int64_t n_perm = 0;
};

struct AssociationParams {
  std::int64_t n_episodes = 70;
  std::int64_t stride_k = 5;
  std::uint64_t seed = 1;
  std::uint64_t episode_offset = 0;
  std::vector<metrics::ControlOptions> controls;
  std::int64_t n_perm = 20000;
  stats::Sidedness sidedness = stats::Sidedness::greater;
  std::int64_t workers = 1;
};

// Group-by-outcome analysis of already-collected traces (the file-driven
// analyze path uses this directly).
OutcomeAssociationReport association_from_traces(const std::vector<RolloutTrace>& traces,
                                                 const AssociationParams& params);

OutcomeAssociationReport run_outcome_association(const sim::PolicyConfig& policy_config,
                                                 const sim::EnvConfig& env_config,
                                                 std::int64_t horizon,
                                                 const AssociationParams& params);

// ---------------------------------------------------------------------------
// Fixed-context noise scan

struct ContextScan {
  std::string context_id;
  std::vector<double> btj_samples;
  std::vector<double> contrast_samples;
  std::int64_t n_configured = 0;
  std::int64_t n_invalid = 0;
  double btj_std = 0.0;
  double contrast_std = 0.0;
  double reference_btj = 0.0;
  double reference_contrast = 0.0;
  bool reference_valid = false;
};

struct ScanResult {
  std::vector<ContextScan> contexts;
  double mean_btj_std = 0.0;
  double mean_contrast_std = 0.0;
  stats::IntervalEstimate btj_std_ci;       // context-level bootstrap
  stats::IntervalEstimate contrast_std_ci;  // context-level bootstrap
  std::string varied;  // which noise was redrawn per sample: z0 | z1 | both
  std::int64_t n_contexts = 0;
  std::int64_t n_samples = 0;
};

struct ScanParams {
  std::int64_t n_contexts = 16;
  std::int64_t n_samples = 24;
  std::string vary = "z1";
  std::int64_t reference_episodes = 12;
  std::int64_t stride_k = 5;
  std::uint64_t seed = 1;
  std::int64_t n_boot = 10000;
  double level = 0.95;
};

ScanResult run_noise_scan(const sim::PolicyConfig& policy_config,
                          const sim::EnvConfig& env_config, std::int64_t horizon,
                          const ScanParams& params);

// ---------------------------------------------------------------------------
// z0 / z1 decomposition

enum class VaryCondition { vary_z0, vary_z1, vary_both };
const char* vary_condition_name(VaryCondition c);

struct DecompositionRow {
  VaryCondition condition = VaryCondition::vary_z0;
  // Mean over contexts of the within-context sample std.
  double btj_std = 0.0;
  double contrast_std = 0.0;
  std::int64_t n_samples = 0;
  std::int64_t n_contexts = 0;
  std::int64_t n_invalid = 0;
};

struct DecompositionParams {
  std::int64_t n_contexts = 2;
  std::int64_t n_samples = 5;
  std::int64_t reference_episodes = 12;
  std::int64_t stride_k = 5;
  std::uint64_t seed = 1;
};

std::vector<DecompositionRow> run_decomposition(const sim::PolicyConfig& policy_config,
                                                const sim::EnvConfig& env_config,
                                                std::int64_t horizon,
                                                const DecompositionParams& params);

// ---------------------------------------------------------------------------
// Direction search and alpha sweeps

// A frozen context plus the reference noises of its source rollout; the
// probe artifact A(z) evaluates the first-boundary stitch with the next
// chunk's noise replaced by z.
struct ProbeContext {
  sim::ContextSnapshot context;
  sim::NoiseVector z0_ref;
  sim::NoiseVector z1_ref;
};

using ProbeFn = std::function<std::optional<ArtifactSummary>(const sim::NoiseVector&)>;

// Probe functor for a frozen context (A = stitched-window metrics with
// varied next-chunk noise).
ProbeFn make_context_probe(const ProbeContext& probe_context, const sim::Policy& policy,
                           const sim::EnvConfig& env_config, std::int64_t stride_k);

// Scores n random unit directions by |A(z + eps d) - A(z - eps d)| on the
// first-boundary jerk contrast and returns the argmax, sign-fixed so that
// positive alpha increases the artifact. Ties break to the lowest candidate
// index; a best score below 1e-12 marks the result degenerate.
sim::SteeringDirection search_direction_over(const ProbeFn& probe,
                                             const sim::NoiseVector& z_ref,
                                             std::int64_t n_directions, double epsilon,
                                             Rng& rng, const std::string& context_id);

sim::SteeringDirection search_direction(const ProbeContext& probe_context,
                                        const sim::Policy& policy,
                                        const sim::EnvConfig& env_config,
                                        std::int64_t stride_k, std::int64_t n_directions,
                                        double epsilon, Rng& rng);

struct SweepResult {
  std::string context_id;
  sim::SteeringDirection direction;
  std::vector<double> alpha_grid;
  std::vector<double> btj_values;       // NaN at invalid grid points
  std::vector<double> contrast_values;  // NaN at invalid grid points
  std::vector<std::uint8_t> valid;
  double pearson_btj = 0.0;       // NaN when undefined
  double pearson_contrast = 0.0;  // NaN when undefined
  double btj_range = 0.0;
  double contrast_range = 0.0;
  std::int64_t n_invalid = 0;
};

SweepResult run_alpha_sweep(const ProbeContext& probe_context,
                            const sim::SteeringDirection& direction,
                            const std::vector<double>& alpha_grid,
                            const sim::Policy& policy, const sim::EnvConfig& env_config,
                            std::int64_t stride_k);

struct DirectionParams {
  std::int64_t n_contexts = 4;
  std::int64_t n_directions = 12;
  double epsilon = 0.5;
  std::vector<double> alpha_grid{-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0};
  std::int64_t reference_episodes = 12;
  std::int64_t stride_k = 5;
  std::uint64_t seed = 1;
};

struct DirectionSearchResult {
  std::vector<SweepResult> sweeps;
  double mean_abs_r_btj = 0.0;
  double mean_abs_r_contrast = 0.0;
  double mean_btj_range = 0.0;
  double mean_contrast_range = 0.0;
};

DirectionSearchResult run_direction_search(const sim::PolicyConfig& policy_config,
                                           const sim::EnvConfig& env_config,
                                           std::int64_t horizon,
                                           const DirectionParams& params);

// Reference probe contexts (snapshots + source-rollout noises) drawn from
// fresh reference rollouts; shared by the scan/decomposition/direction
// runners and the tests.
std::vector<ProbeContext> reference_probe_contexts(const sim::Policy& policy,
                                                   const sim::EnvConfig& env_config,
                                                   std::int64_t stride_k,
                                                   std::uint64_t seed,
                                                   std::int64_t reference_episodes,
                                                   std::int64_t n_contexts);

// ---------------------------------------------------------------------------
// Trajectory-level steering

struct GroupReport {
  std::string arm;
  std::int64_t n = 0;
  std::int64_t successes = 0;
  stats::IntervalEstimate success_rate;   // Wilson
  stats::IntervalEstimate contrast_mean;  // bootstrap over episodes
  std::vector<double> raw_contrasts;
  std::vector<std::uint8_t> raw_success;
  std::int64_t fallback_episodes = 0;
  std::int64_t excluded_episodes = 0;
};

struct SteeringRunResult {
  std::vector<GroupReport> groups;  // ordered as requested in params
  bool contrast_ordering_holds = false;  // good < baseline < bad
  bool success_ordering_holds = false;   // good > baseline > bad
  std::string regime;  // ceiling | headroom | floor, from the baseline arm
};

struct SteeringParams {
  std::vector<std::string> arms{"baseline", "good", "bad"};
  std::int64_t n_episodes_per_arm = 50;
  double alpha_magnitude = 1.0;
  std::int64_t warmup_boundaries = 2;
  std::int64_t n_directions = 12;
  double epsilon = 0.5;
  bool research_each_boundary = false;
  std::int64_t stride_k = 5;
  std::uint64_t seed = 1;
  std::uint64_t episode_offset = 0;
  std::int64_t n_boot = 10000;
  double level = 0.95;
  std::int64_t workers = 1;
};

SteeringRunResult run_trajectory_steering(const sim::PolicyConfig& policy_config,
                                          const sim::EnvConfig& env_config,
                                          std::int64_t horizon,
                                          const SteeringParams& params);

// Pools per-arm reports across runs (arm sets must match) and recomputes
// both intervals from the pooled raw values.
struct AggregatedReports {
  std::vector<GroupReport> groups;
  std::vector<std::string> constituent_regimes;
  std::string regime_note;
  bool contrast_ordering_holds = false;
  bool success_ordering_holds = false;
};

AggregatedReports aggregate_reports(const std::vector<SteeringRunResult>& runs,
                                    std::uint64_t seed, std::int64_t n_boot,
                                    double level);

std::string classify_regime(double baseline_success_rate);

// Deterministic worker pool: runs fn(0..n-1) with at most `workers` threads;
// results must be written by index so the outcome is order-independent.
void parallel_for(std::int64_t n, std::int64_t workers,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace chunkseam::experiments
