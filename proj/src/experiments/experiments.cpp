#include "experiments/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "core/error.hpp"

namespace chunkseam::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_or_nan(const std::vector<double>& xs) {
  return xs.empty() ? kNaN : stats::mean(xs);
}

}  // namespace

void parallel_for(std::int64_t n, std::int64_t workers,
                  const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) {
    return;
  }
  workers = std::max<std::int64_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (std::int64_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        std::int64_t i = next.fetch_add(1);
        if (i >= n) {
          return;
        }
        fn(i);
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
}

// ---------------------------------------------------------------------------
// Outcome association

OutcomeAssociationReport association_from_traces(const std::vector<RolloutTrace>& traces,
                                                 const AssociationParams& params) {
  OutcomeAssociationReport report;
  report.sidedness = params.sidedness;
  report.n_perm = params.n_perm;
  report.n_episodes = static_cast<std::int64_t>(traces.size());

  std::vector<const RolloutTrace*> usable;
  for (const auto& trace : traces) {
    if (!trace.valid) {
      ++report.n_invalid;
      continue;
    }
    usable.push_back(&trace);
    if (trace.success) {
      ++report.n_success;
    } else {
      ++report.n_failure;
    }
  }
  report.underpowered =
      report.n_episodes < 10 || report.n_success == 0 || report.n_failure == 0;

  std::vector<metrics::ControlOptions> controls = params.controls;
  if (controls.empty()) {
    controls = {metrics::ControlOptions{metrics::ControlWindow::all},
                metrics::ControlOptions{metrics::ControlWindow::contact_free},
                metrics::ControlOptions{metrics::ControlWindow::contact_free_first_n}};
  }

  for (const auto& control : controls) {
    ControlRow row;
    row.control = metrics::control_window_name(control.window);
    std::vector<double> success_values;
    std::vector<double> failure_values;
    for (const auto* trace : usable) {
      double value;
      try {
        value = metrics::episode_contrast(*trace, control).jerk_contrast;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::capability) {
          throw;  // requested control cannot run on this input at all
        }
        ++row.excluded;
        continue;
      }
      (trace->success ? success_values : failure_values).push_back(value);
    }
    row.n_success = static_cast<std::int64_t>(success_values.size());
    row.n_failure = static_cast<std::int64_t>(failure_values.size());
    row.success_mean = mean_or_nan(success_values);
    row.failure_mean = mean_or_nan(failure_values);
    row.delta = row.failure_mean - row.success_mean;
    row.applicable = row.n_success >= 1 && row.n_failure >= 1;
    if (row.applicable) {
      row.test = stats::permutation_test(
          success_values, failure_values, params.n_perm, params.sidedness,
          Rng::derive_seed(params.seed, "association-perm", fnv1a(row.control)));
    }
    report.rows.push_back(std::move(row));
  }

  // Matched-horizon jerk time course across the outcome groups.
  if (!usable.empty()) {
    std::vector<RolloutTrace> copies;
    copies.reserve(usable.size());
    for (const auto* trace : usable) {
      copies.push_back(*trace);
    }
    auto truncated = metrics::matched_horizon_truncate(copies);
    std::int64_t common = truncated.front().steps();
    report.matched_horizon_length = common;
    for (std::int64_t t = 2; t < common; ++t) {
      TimecoursePoint point;
      point.t = t;
      double sum_s = 0.0, sum_f = 0.0;
      std::int64_t n_s = 0, n_f = 0;
      for (const auto& trace : truncated) {
        double j = metrics::jerk_at(trace.executed, t);
        if (trace.success) {
          sum_s += j;
          ++n_s;
        } else {
          sum_f += j;
          ++n_f;
        }
      }
      point.mean_jerk_success = n_s > 0 ? sum_s / static_cast<double>(n_s) : kNaN;
      point.mean_jerk_failure = n_f > 0 ? sum_f / static_cast<double>(n_f) : kNaN;
      point.boundary = truncated.front().phase(t) == 0;
      report.matched_horizon.push_back(point);
    }
  }
  return report;
}

OutcomeAssociationReport run_outcome_association(const sim::PolicyConfig& policy_config,
                                                 const sim::EnvConfig& env_config,
                                                 std::int64_t horizon,
                                                 const AssociationParams& params) {
  if (params.n_episodes < 1) {
    throw_error(ErrorCode::invalid_argument, "association needs n_episodes >= 1");
  }
  sim::Policy policy(policy_config, env_config, horizon);
  std::vector<RolloutTrace> traces(static_cast<std::size_t>(params.n_episodes));
  parallel_for(params.n_episodes, params.workers, [&](std::int64_t i) {
    auto result = sim::rollout(policy, env_config, params.stride_k, params.seed,
                               params.episode_offset + static_cast<std::uint64_t>(i));
    traces[static_cast<std::size_t>(i)] = std::move(result.trace);
  });
  return association_from_traces(traces, params);
}

// ---------------------------------------------------------------------------
// Probe context pool

std::vector<ProbeContext> reference_probe_contexts(const sim::Policy& policy,
                                                   const sim::EnvConfig& env_config,
                                                   std::int64_t stride_k,
                                                   std::uint64_t seed,
                                                   std::int64_t reference_episodes,
                                                   std::int64_t n_contexts) {
  if (reference_episodes < 1) {
    throw_error(ErrorCode::invalid_argument, "need >= 1 reference episode");
  }
  std::vector<sim::RolloutResult> rollouts(static_cast<std::size_t>(reference_episodes));
  for (std::int64_t e = 0; e < reference_episodes; ++e) {
    rollouts[static_cast<std::size_t>(e)] =
        sim::rollout(policy, env_config, stride_k, seed, static_cast<std::uint64_t>(e));
  }
  auto snapshots = sim::snapshot_contexts(rollouts, n_contexts);
  std::vector<ProbeContext> contexts;
  contexts.reserve(snapshots.size());
  for (auto& snap : snapshots) {
    ProbeContext pc;
    // Reference noises are the draws the source rollout used at this
    // boundary and the next one, reconstructed from the seed streams.
    Rng z0_rng = Rng::derive(seed, "noise", snap.source_episode_index,
                             static_cast<std::uint64_t>(snap.source_chunk_index));
    Rng z1_rng = Rng::derive(seed, "noise", snap.source_episode_index,
                             static_cast<std::uint64_t>(snap.source_chunk_index + 1));
    pc.z0_ref = policy.draw_noise(z0_rng, snap.context_id + "/z0-ref",
                                  SeedRecord{seed, snap.source_episode_index});
    pc.z1_ref = policy.draw_noise(z1_rng, snap.context_id + "/z1-ref",
                                  SeedRecord{seed, snap.source_episode_index});
    pc.context = std::move(snap);
    contexts.push_back(std::move(pc));
  }
  return contexts;
}

// ---------------------------------------------------------------------------
// Noise scan

ScanResult run_noise_scan(const sim::PolicyConfig& policy_config,
                          const sim::EnvConfig& env_config, std::int64_t horizon,
                          const ScanParams& params) {
  if (params.vary != "z0" && params.vary != "z1" && params.vary != "both") {
    throw_error(ErrorCode::config, "scan vary must be one of z0|z1|both");
  }
  if (params.n_samples < 1) {
    throw_error(ErrorCode::invalid_argument, "scan needs n_samples >= 1");
  }
  sim::Policy policy(policy_config, env_config, horizon);
  auto contexts = reference_probe_contexts(policy, env_config, params.stride_k,
                                           params.seed, params.reference_episodes,
                                           params.n_contexts);
  ScanResult result;
  result.varied = params.vary;
  result.n_contexts = params.n_contexts;
  result.n_samples = params.n_samples;

  for (std::int64_t i = 0; i < static_cast<std::int64_t>(contexts.size()); ++i) {
    const auto& pc = contexts[static_cast<std::size_t>(i)];
    ContextScan scan;
    scan.context_id = pc.context.context_id;
    scan.n_configured = params.n_samples;
    auto reference = sim::first_boundary_probe(pc.context, pc.z0_ref, pc.z1_ref, policy,
                                               env_config, params.stride_k);
    scan.reference_valid = reference.valid;
    scan.reference_btj = reference.valid ? reference.summary.boundary_transition_jerk : kNaN;
    scan.reference_contrast = reference.valid ? reference.summary.jerk_contrast : kNaN;
    for (std::int64_t j = 0; j < params.n_samples; ++j) {
      Rng sample_rng = Rng::derive(params.seed, "scan-sample",
                                   static_cast<std::uint64_t>(i),
                                   static_cast<std::uint64_t>(j));
      sim::NoiseVector z0 = pc.z0_ref;
      sim::NoiseVector z1 = pc.z1_ref;
      std::string sample_id = scan.context_id + "/s" + std::to_string(j);
      if (params.vary == "z0" || params.vary == "both") {
        z0 = policy.draw_noise(sample_rng, sample_id + "/z0", pc.z0_ref.seed);
      }
      if (params.vary == "z1" || params.vary == "both") {
        z1 = policy.draw_noise(sample_rng, sample_id + "/z1", pc.z1_ref.seed);
      }
      auto probe = sim::first_boundary_probe(pc.context, z0, z1, policy, env_config,
                                             params.stride_k);
      if (!probe.valid) {
        ++scan.n_invalid;
        continue;
      }
      scan.btj_samples.push_back(probe.summary.boundary_transition_jerk);
      scan.contrast_samples.push_back(probe.summary.jerk_contrast);
    }
    scan.btj_std = stats::sample_std(scan.btj_samples);
    scan.contrast_std = stats::sample_std(scan.contrast_samples);
    result.contexts.push_back(std::move(scan));
  }

  std::vector<double> btj_stds;
  std::vector<double> contrast_stds;
  for (const auto& scan : result.contexts) {
    btj_stds.push_back(scan.btj_std);
    contrast_stds.push_back(scan.contrast_std);
  }
  result.mean_btj_std = mean_or_nan(btj_stds);
  result.mean_contrast_std = mean_or_nan(contrast_stds);
  if (btj_stds.size() >= 2) {
    result.btj_std_ci = stats::bootstrap_ci(btj_stds, params.n_boot, params.level,
                                            Rng::derive_seed(params.seed, "scan-boot-btj"));
    result.contrast_std_ci =
        stats::bootstrap_ci(contrast_stds, params.n_boot, params.level,
                            Rng::derive_seed(params.seed, "scan-boot-contrast"));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Decomposition

const char* vary_condition_name(VaryCondition c) {
  switch (c) {
    case VaryCondition::vary_z0:
      return "vary_z0";
    case VaryCondition::vary_z1:
      return "vary_z1";
    case VaryCondition::vary_both:
      return "vary_both";
  }
  return "unknown";
}

std::vector<DecompositionRow> run_decomposition(const sim::PolicyConfig& policy_config,
                                                const sim::EnvConfig& env_config,
                                                std::int64_t horizon,
                                                const DecompositionParams& params) {
  sim::Policy policy(policy_config, env_config, horizon);
  auto contexts = reference_probe_contexts(policy, env_config, params.stride_k,
                                           params.seed, params.reference_episodes,
                                           params.n_contexts);
  std::vector<DecompositionRow> rows;
  for (auto condition :
       {VaryCondition::vary_z0, VaryCondition::vary_z1, VaryCondition::vary_both}) {
    DecompositionRow row;
    row.condition = condition;
    row.n_samples = params.n_samples;
    row.n_contexts = params.n_contexts;
    std::vector<double> btj_stds;
    std::vector<double> contrast_stds;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(contexts.size()); ++i) {
      const auto& pc = contexts[static_cast<std::size_t>(i)];
      std::vector<double> btj;
      std::vector<double> contrast;
      for (std::int64_t j = 0; j < params.n_samples; ++j) {
        Rng sample_rng =
            Rng::derive(params.seed,
                        std::string("decomp-") + vary_condition_name(condition),
                        static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
        sim::NoiseVector z0 = pc.z0_ref;
        sim::NoiseVector z1 = pc.z1_ref;
        std::string sample_id =
            pc.context.context_id + "/" + vary_condition_name(condition) + std::to_string(j);
        if (condition == VaryCondition::vary_z0 || condition == VaryCondition::vary_both) {
          z0 = policy.draw_noise(sample_rng, sample_id + "/z0", pc.z0_ref.seed);
        }
        if (condition == VaryCondition::vary_z1 || condition == VaryCondition::vary_both) {
          z1 = policy.draw_noise(sample_rng, sample_id + "/z1", pc.z1_ref.seed);
        }
        auto probe = sim::first_boundary_probe(pc.context, z0, z1, policy, env_config,
                                               params.stride_k);
        if (!probe.valid) {
          ++row.n_invalid;
          continue;
        }
        btj.push_back(probe.summary.boundary_transition_jerk);
        contrast.push_back(probe.summary.jerk_contrast);
      }
      btj_stds.push_back(stats::sample_std(btj));
      contrast_stds.push_back(stats::sample_std(contrast));
    }
    row.btj_std = mean_or_nan(btj_stds);
    row.contrast_std = mean_or_nan(contrast_stds);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Direction search + sweeps

ProbeFn make_context_probe(const ProbeContext& probe_context, const sim::Policy& policy,
                           const sim::EnvConfig& env_config, std::int64_t stride_k) {
  const sim::Policy* policy_ptr = &policy;
  sim::ContextSnapshot context = probe_context.context;
  sim::NoiseVector z0 = probe_context.z0_ref;
  return [policy_ptr, context, z0, env_config,
          stride_k](const sim::NoiseVector& z) -> std::optional<ArtifactSummary> {
    auto probe =
        sim::first_boundary_probe(context, z0, z, *policy_ptr, env_config, stride_k);
    if (!probe.valid) {
      return std::nullopt;
    }
    return probe.summary;
  };
}

sim::SteeringDirection search_direction_over(const ProbeFn& probe,
                                             const sim::NoiseVector& z_ref,
                                             std::int64_t n_directions, double epsilon,
                                             Rng& rng, const std::string& context_id) {
  if (n_directions < 1) {
    throw_error(ErrorCode::invalid_argument, "direction search needs n_directions >= 1");
  }
  if (epsilon <= 0.0) {
    throw_error(ErrorCode::invalid_argument, "direction search needs epsilon > 0");
  }
  std::int64_t latent = z_ref.values.size();
  double best_score = -1.0;
  std::int64_t best_index = -1;
  VectorXd best_direction;
  bool best_plus_higher = true;
  std::int64_t invalid = 0;
  for (std::int64_t i = 0; i < n_directions; ++i) {
    VectorXd dir(latent);
    for (std::int64_t j = 0; j < latent; ++j) {
      dir[j] = rng.next_normal();
    }
    dir.normalize();
    sim::NoiseVector plus;
    plus.values = z_ref.values + epsilon * dir;
    sim::NoiseVector minus;
    minus.values = z_ref.values - epsilon * dir;
    auto a_plus = probe(plus);
    auto a_minus = probe(minus);
    if (!a_plus || !a_minus) {
      ++invalid;
      continue;
    }
    double score = std::abs(a_plus->jerk_contrast - a_minus->jerk_contrast);
    if (score > best_score) {
      best_score = score;
      best_index = i;
      best_direction = dir;
      best_plus_higher = a_plus->jerk_contrast >= a_minus->jerk_contrast;
    }
  }
  if (best_index < 0) {
    throw_error(ErrorCode::runner,
                "direction search failed: all " + std::to_string(invalid) +
                    " candidate probes were invalid");
  }
  sim::SteeringDirection direction;
  // Polarity convention: positive alpha increases the artifact.
  direction.direction = best_plus_higher ? best_direction : VectorXd(-best_direction);
  direction.direction.normalize();
  direction.context_id = context_id;
  direction.candidate_index = best_index;
  direction.selection_score = best_score;
  direction.degenerate = best_score < 1e-12;
  direction.direction_id = context_id + "/dir" + std::to_string(best_index);
  return direction;
}

sim::SteeringDirection search_direction(const ProbeContext& probe_context,
                                        const sim::Policy& policy,
                                        const sim::EnvConfig& env_config,
                                        std::int64_t stride_k, std::int64_t n_directions,
                                        double epsilon, Rng& rng) {
  auto probe = make_context_probe(probe_context, policy, env_config, stride_k);
  return search_direction_over(probe, probe_context.z1_ref, n_directions, epsilon, rng,
                               probe_context.context.context_id);
}

SweepResult run_alpha_sweep(const ProbeContext& probe_context,
                            const sim::SteeringDirection& direction,
                            const std::vector<double>& alpha_grid,
                            const sim::Policy& policy, const sim::EnvConfig& env_config,
                            std::int64_t stride_k) {
  if (!std::is_sorted(alpha_grid.begin(), alpha_grid.end())) {
    throw_error(ErrorCode::invalid_argument, "alpha grid must be sorted ascending");
  }
  if (std::find(alpha_grid.begin(), alpha_grid.end(), 0.0) == alpha_grid.end()) {
    throw_error(ErrorCode::invalid_argument, "alpha grid must contain 0");
  }
  auto probe = make_context_probe(probe_context, policy, env_config, stride_k);
  SweepResult sweep;
  sweep.context_id = probe_context.context.context_id;
  sweep.direction = direction;
  sweep.alpha_grid = alpha_grid;
  std::vector<double> valid_alpha;
  std::vector<double> valid_btj;
  std::vector<double> valid_contrast;
  for (double alpha : alpha_grid) {
    auto z = sim::steer(probe_context.z1_ref, direction, alpha);
    auto summary = probe(z);
    if (!summary) {
      sweep.btj_values.push_back(kNaN);
      sweep.contrast_values.push_back(kNaN);
      sweep.valid.push_back(0);
      ++sweep.n_invalid;
      continue;
    }
    sweep.btj_values.push_back(summary->boundary_transition_jerk);
    sweep.contrast_values.push_back(summary->jerk_contrast);
    sweep.valid.push_back(1);
    valid_alpha.push_back(alpha);
    valid_btj.push_back(summary->boundary_transition_jerk);
    valid_contrast.push_back(summary->jerk_contrast);
  }
  auto correlation = [&](const std::vector<double>& values) {
    if (valid_alpha.size() < 3) {
      return kNaN;
    }
    try {
      return stats::pearson_r(valid_alpha, values);
    } catch (const Error&) {
      return kNaN;
    }
  };
  sweep.pearson_btj = correlation(valid_btj);
  sweep.pearson_contrast = correlation(valid_contrast);
  auto range_of = [](const std::vector<double>& values) {
    if (values.empty()) {
      return kNaN;
    }
    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    return *mx - *mn;
  };
  sweep.btj_range = range_of(valid_btj);
  sweep.contrast_range = range_of(valid_contrast);
  return sweep;
}

DirectionSearchResult run_direction_search(const sim::PolicyConfig& policy_config,
                                           const sim::EnvConfig& env_config,
                                           std::int64_t horizon,
                                           const DirectionParams& params) {
  sim::Policy policy(policy_config, env_config, horizon);
  auto contexts = reference_probe_contexts(policy, env_config, params.stride_k,
                                           params.seed, params.reference_episodes,
                                           params.n_contexts);
  DirectionSearchResult result;
  std::vector<double> abs_r_btj;
  std::vector<double> abs_r_contrast;
  std::vector<double> btj_ranges;
  std::vector<double> contrast_ranges;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(contexts.size()); ++i) {
    const auto& pc = contexts[static_cast<std::size_t>(i)];
    Rng rng = Rng::derive(params.seed, "dirsearch", static_cast<std::uint64_t>(i));
    auto direction = search_direction(pc, policy, env_config, params.stride_k,
                                      params.n_directions, params.epsilon, rng);
    auto sweep = run_alpha_sweep(pc, direction, params.alpha_grid, policy, env_config,
                                 params.stride_k);
    if (std::isfinite(sweep.pearson_btj)) {
      abs_r_btj.push_back(std::abs(sweep.pearson_btj));
    }
    if (std::isfinite(sweep.pearson_contrast)) {
      abs_r_contrast.push_back(std::abs(sweep.pearson_contrast));
    }
    if (std::isfinite(sweep.btj_range)) {
      btj_ranges.push_back(sweep.btj_range);
    }
    if (std::isfinite(sweep.contrast_range)) {
      contrast_ranges.push_back(sweep.contrast_range);
    }
    result.sweeps.push_back(std::move(sweep));
  }
  result.mean_abs_r_btj = mean_or_nan(abs_r_btj);
  result.mean_abs_r_contrast = mean_or_nan(abs_r_contrast);
  result.mean_btj_range = mean_or_nan(btj_ranges);
  result.mean_contrast_range = mean_or_nan(contrast_ranges);
  return result;
}

// ---------------------------------------------------------------------------
// Trajectory-level steering

std::string classify_regime(double baseline_success_rate) {
  if (baseline_success_rate >= 0.95) {
    return "ceiling";
  }
  if (baseline_success_rate <= 0.15) {
    return "floor";
  }
  return "headroom";
}

namespace {

struct EpisodeOutcome {
  bool success = false;
  double contrast = 0.0;
  bool contrast_defined = false;
  bool fallback = false;
};

double arm_alpha(const std::string& arm, double magnitude) {
  if (arm == "baseline") return 0.0;
  if (arm == "good") return -magnitude;
  if (arm == "bad") return magnitude;
  throw_error(ErrorCode::config, "unknown steering arm '" + arm + "'");
}

EpisodeOutcome run_steered_episode(const sim::Policy& policy,
                                   const sim::EnvConfig& env_config,
                                   const SteeringParams& params, double alpha,
                                   std::uint64_t episode_index) {
  std::optional<sim::SteeringDirection> direction;
  bool fallback = false;
  std::int64_t stride_k = params.stride_k;
  const double clip = env_config.action_clip;

  sim::ChunkNoiseHook hook = [&](std::int64_t chunk_index,
                                 const sim::ContextSnapshot& context,
                                 sim::NoiseVector raw,
                                 const MatrixXd& executed) -> sim::NoiseDecision {
    sim::NoiseDecision decision;
    decision.z = std::move(raw);
    if (chunk_index < params.warmup_boundaries) {
      return decision;
    }
    bool searched_now = false;
    if ((!direction || params.research_each_boundary) && executed.rows() >= stride_k) {
      // Live probe: stitch the actually-executed last stride with the head
      // of a candidate chunk generated from the current context.
      MatrixXd prefix = executed.bottomRows(stride_k);
      const sim::Policy* policy_ptr = &policy;
      ProbeFn live_probe =
          [policy_ptr, &context, &prefix, clip,
           stride_k](const sim::NoiseVector& z) -> std::optional<ArtifactSummary> {
        auto chunk = policy_ptr->generate_chunk(context, z);
        MatrixXd head = sim::clip_actions(chunk.actions.topRows(stride_k), clip);
        return metrics::stitched_window_summary(prefix, head, stride_k);
      };
      Rng dir_rng = Rng::derive(params.seed, "dirsearch", episode_index,
                                static_cast<std::uint64_t>(chunk_index));
      try {
        direction = search_direction_over(live_probe, decision.z, params.n_directions,
                                          params.epsilon, dir_rng, context.context_id);
      } catch (const Error&) {
        direction.reset();
        fallback = true;
      }
      if (direction && direction->degenerate) {
        fallback = true;
      }
      searched_now = true;
    }
    bool eligible = direction && !direction->degenerate && alpha != 0.0;
    if (eligible && searched_now && !params.research_each_boundary) {
      // Default scheme: the boundary where the search ran stays unsteered;
      // steering starts at the next one.
      eligible = false;
    }
    if (eligible) {
      decision.z = sim::steer(decision.z, *direction, alpha);
      decision.tag = SteeringTag{alpha, direction->direction_id};
    }
    decision.fallback_flagged = fallback;
    return decision;
  };

  auto result = sim::rollout(policy, env_config, stride_k, params.seed, episode_index, hook);
  EpisodeOutcome outcome;
  outcome.success = result.trace.success;
  outcome.fallback = fallback;
  try {
    outcome.contrast =
        metrics::episode_contrast(result.trace, metrics::ControlOptions{}).jerk_contrast;
    outcome.contrast_defined = true;
  } catch (const Error&) {
    outcome.contrast_defined = false;
  }
  return outcome;
}

GroupReport report_from_outcomes(const std::string& arm,
                                 const std::vector<EpisodeOutcome>& outcomes,
                                 std::uint64_t seed, std::int64_t n_boot, double level) {
  GroupReport report;
  report.arm = arm;
  for (const auto& outcome : outcomes) {
    if (!outcome.contrast_defined) {
      ++report.excluded_episodes;
      continue;
    }
    report.raw_contrasts.push_back(outcome.contrast);
    report.raw_success.push_back(outcome.success ? 1 : 0);
    if (outcome.success) {
      ++report.successes;
    }
    if (outcome.fallback) {
      ++report.fallback_episodes;
    }
  }
  report.n = static_cast<std::int64_t>(report.raw_contrasts.size());
  if (report.n > 0) {
    report.success_rate = stats::wilson_ci(report.successes, report.n, level);
    report.contrast_mean =
        stats::bootstrap_ci(report.raw_contrasts, n_boot, level,
                            Rng::derive_seed(seed, "groupreport", fnv1a(arm)));
  }
  return report;
}

const GroupReport* find_arm(const std::vector<GroupReport>& groups,
                            const std::string& arm) {
  for (const auto& group : groups) {
    if (group.arm == arm) {
      return &group;
    }
  }
  return nullptr;
}

void compute_orderings(const std::vector<GroupReport>& groups, bool& contrast_ordering,
                       bool& success_ordering) {
  contrast_ordering = false;
  success_ordering = false;
  const auto* good = find_arm(groups, "good");
  const auto* baseline = find_arm(groups, "baseline");
  const auto* bad = find_arm(groups, "bad");
  if (!good || !baseline || !bad || good->n == 0 || baseline->n == 0 || bad->n == 0) {
    return;
  }
  contrast_ordering = good->contrast_mean.point < baseline->contrast_mean.point &&
                      baseline->contrast_mean.point < bad->contrast_mean.point;
  success_ordering = good->success_rate.point > baseline->success_rate.point &&
                     baseline->success_rate.point > bad->success_rate.point;
}

}  // namespace

SteeringRunResult run_trajectory_steering(const sim::PolicyConfig& policy_config,
                                          const sim::EnvConfig& env_config,
                                          std::int64_t horizon,
                                          const SteeringParams& params) {
  if (params.alpha_magnitude <= 0.0) {
    throw_error(ErrorCode::invalid_argument, "steering needs |alpha| > 0");
  }
  if (params.warmup_boundaries < 1) {
    throw_error(ErrorCode::invalid_argument, "steering needs warmup_boundaries >= 1");
  }
  if (params.n_episodes_per_arm < 1) {
    throw_error(ErrorCode::invalid_argument, "steering needs >= 1 episode per arm");
  }
  sim::Policy policy(policy_config, env_config, horizon);
  SteeringRunResult result;
  for (const auto& arm : params.arms) {
    double alpha = arm_alpha(arm, params.alpha_magnitude);
    std::vector<EpisodeOutcome> outcomes(
        static_cast<std::size_t>(params.n_episodes_per_arm));
    parallel_for(params.n_episodes_per_arm, params.workers, [&](std::int64_t i) {
      outcomes[static_cast<std::size_t>(i)] = run_steered_episode(
          policy, env_config, params, alpha,
          params.episode_offset + static_cast<std::uint64_t>(i));
    });
    result.groups.push_back(report_from_outcomes(arm, outcomes, params.seed,
                                                 params.n_boot, params.level));
  }
  compute_orderings(result.groups, result.contrast_ordering_holds,
                    result.success_ordering_holds);
  if (const auto* baseline = find_arm(result.groups, "baseline");
      baseline && baseline->n > 0) {
    result.regime = classify_regime(baseline->success_rate.point);
  }
  return result;
}

AggregatedReports aggregate_reports(const std::vector<SteeringRunResult>& runs,
                                    std::uint64_t seed, std::int64_t n_boot,
                                    double level) {
  if (runs.empty()) {
    throw_error(ErrorCode::invalid_argument, "aggregate needs >= 1 run");
  }
  std::vector<std::string> arms;
  for (const auto& group : runs.front().groups) {
    arms.push_back(group.arm);
  }
  for (const auto& run : runs) {
    if (run.groups.size() != arms.size()) {
      throw_error(ErrorCode::invalid_argument, "aggregate: mismatched arm sets");
    }
    for (std::size_t i = 0; i < arms.size(); ++i) {
      if (run.groups[i].arm != arms[i]) {
        throw_error(ErrorCode::invalid_argument,
                    "aggregate: mismatched arm '" + run.groups[i].arm +
                        "' (expected '" + arms[i] + "')");
      }
    }
  }
  AggregatedReports pooled;
  for (const auto& arm : arms) {
    GroupReport total;
    total.arm = arm;
    for (const auto& run : runs) {
      const auto* group = find_arm(run.groups, arm);
      total.successes += group->successes;
      total.fallback_episodes += group->fallback_episodes;
      total.excluded_episodes += group->excluded_episodes;
      total.raw_contrasts.insert(total.raw_contrasts.end(), group->raw_contrasts.begin(),
                                 group->raw_contrasts.end());
      total.raw_success.insert(total.raw_success.end(), group->raw_success.begin(),
                               group->raw_success.end());
    }
    total.n = static_cast<std::int64_t>(total.raw_contrasts.size());
    if (total.n > 0) {
      total.success_rate = stats::wilson_ci(total.successes, total.n, level);
      total.contrast_mean =
          stats::bootstrap_ci(total.raw_contrasts, n_boot, level,
                              Rng::derive_seed(seed, "groupreport", fnv1a(arm)));
    }
    pooled.groups.push_back(std::move(total));
  }
  for (const auto& run : runs) {
    pooled.constituent_regimes.push_back(run.regime);
  }
  bool mixed = false;
  for (const auto& regime : pooled.constituent_regimes) {
    if (regime != pooled.constituent_regimes.front()) {
      mixed = true;
    }
  }
  pooled.regime_note =
      mixed ? "mixed regimes pooled: success-rate separation may be compressed"
            : "uniform regime pool";
  compute_orderings(pooled.groups, pooled.contrast_ordering_holds,
                    pooled.success_ordering_holds);
  return pooled;
}

}  // namespace chunkseam::experiments
