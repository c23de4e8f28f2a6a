// Acceptance suite: runs every acceptance criterion at its pinned tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero if any fail.
//
// Monte Carlo blocks are seed-frozen; every expected value is either produced
// by an independent oracle in this file or asserted as an exact structural
// fact.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/metrics.hpp"
#include "core/version.hpp"
#include "core/rng.hpp"
#include "experiments/experiments.hpp"
#include "io/report_io.hpp"
#include "io/trace_io.hpp"
#include "run/commands.hpp"
#include "sim/env.hpp"
#include "sim/policy.hpp"
#include "sim/rollout.hpp"
#include "stats/stats.hpp"
#include "oracles.hpp"

using namespace chunkseam;
namespace m = chunkseam::metrics;
namespace s = chunkseam::stats;
namespace x = chunkseam::experiments;

namespace {

int g_failures = 0;

void report(int criterion, const char* label, bool pass, const std::string& details) {
  std::printf("%s  criterion-%d  %-34s  %s\n", pass ? "PASS" : "FAIL", criterion,
              label, details.c_str());
  if (!pass) {
    ++g_failures;
  }
}

RolloutTrace fixture_trace(const MatrixXd& actions, std::int64_t k) {
  RolloutTrace trace;
  trace.executed = actions;
  trace.stride_k = k;
  trace.horizon_h = 2 * k;
  trace.episode_id = "fixture";
  std::int64_t chunks = (actions.rows() - 1) / k + 1;
  for (std::int64_t c = 0; c < chunks; ++c) {
    ChunkRecord record;
    record.chunk_index = c;
    trace.chunk_records.push_back(record);
  }
  return trace;
}

// --------------------------------------------------------------------------
// Criterion 1: metric correctness against hand-computed oracles.

void criterion_1() {
  int checked = 0;
  bool ok = true;
  auto expect = [&](double actual, double expected, const char* what) {
    ++checked;
    if (std::abs(actual - expected) > 1e-9) {
      ok = false;
      std::printf("  c1 mismatch (%s): %.12g vs %.12g\n", what, actual, expected);
    }
  };

  {  // constant trajectory: all jerk zero
    auto tr = fixture_trace(MatrixXd::Constant(20, 2, 1.7), 5);
    for (auto [t, j] : m::jerk_series(tr, {0, 20})) expect(j, 0.0, "constant");
    expect(m::episode_contrast(tr, {}).jerk_contrast, 0.0, "constant contrast");
  }
  {  // linear ramp: all jerk zero
    MatrixXd a(15, 2);
    for (std::int64_t t = 0; t < 15; ++t) {
      a(t, 0) = 0.3 * t - 1.0;
      a(t, 1) = -0.7 * t;
    }
    auto tr = fixture_trace(a, 5);
    for (auto [t, j] : m::jerk_series(tr, {0, 15})) expect(j, 0.0, "ramp");
  }
  {  // hand second difference (0,0,1,1)
    MatrixXd a(4, 1);
    a << 0, 0, 1, 1;
    auto series = m::jerk_series(fixture_trace(a, 4), {0, 4});
    expect(series[0].second, 1.0, "step j2");
    expect(series[1].second, 1.0, "step j3");
  }
  {  // pulse binning: jerk 1 at {5,6,10,11} -> profile (1,1,0,0,0), contrast 1
    std::vector<double> jerks(15, 0.0);
    jerks[5] = jerks[6] = jerks[10] = jerks[11] = 1.0;
    auto tr = fixture_trace(oracles::actions_with_jerk(jerks), 5);
    auto profile = m::phase_profile(tr, {0, 15});
    expect(profile.mean_jerk_by_phase[0], 1.0, "pulse p0");
    expect(profile.mean_jerk_by_phase[1], 1.0, "pulse p1");
    expect(profile.mean_jerk_by_phase[3], 0.0, "pulse p3");
    expect(m::jerk_contrast(profile), 1.0, "pulse contrast");
  }
  {  // interior-heavy profile -> contrast -1
    PhaseProfile profile;
    profile.mean_jerk_by_phase = {0, 0, 1, 1, 1};
    profile.counts_by_phase = {1, 1, 1, 1, 1};
    expect(m::jerk_contrast(profile), -1.0, "interior-heavy");
  }
  {  // uniform profile -> contrast 0
    PhaseProfile profile;
    profile.mean_jerk_by_phase = {0.4, 0.4, 0.4, 0.4, 0.4};
    profile.counts_by_phase = {3, 3, 3, 3, 3};
    expect(m::jerk_contrast(profile), 0.0, "uniform");
  }
  {  // stitched constant -> BTJ 0; zero-prefix step at t=K -> BTJ 1
    auto flat = fixture_trace(MatrixXd::Constant(12, 1, 2.0), 4);
    expect(m::boundary_transition_jerk(flat, 4), 0.0, "flat stitch");
    MatrixXd step = MatrixXd::Zero(10, 1);
    for (std::int64_t t = 5; t < 10; ++t) step(t, 0) = 1.0;
    expect(m::boundary_transition_jerk(fixture_trace(step, 5), 5), 1.0, "unit stitch");
  }
  {  // phase-independent jerk -> contrast 0 within 1e-9
    std::vector<double> jerks(42, 0.0);
    for (std::size_t t = 2; t < jerks.size(); ++t) jerks[t] = 0.37;
    auto tr = fixture_trace(oracles::actions_with_jerk(jerks), 5);
    expect(m::episode_contrast(tr, {}).jerk_contrast, 0.0, "phase-independent");
  }
  {  // two random trajectories vs the direct binning + plug-in oracle
    for (std::uint64_t seed : {11u, 12u}) {
      Rng rng(seed);
      MatrixXd a(30, 2);
      for (std::int64_t t = 0; t < 30; ++t) {
        a(t, 0) = rng.next_normal();
        a(t, 1) = rng.next_normal();
      }
      auto tr = fixture_trace(a, 5);
      auto summary = m::episode_contrast(tr, {});
      std::vector<std::uint8_t> all(30, 1);
      auto direct = oracles::bin_direct(a, 5, all);
      expect(summary.jerk_contrast, oracles::contrast_direct(direct.mean, 5),
             "random contrast");
      for (std::int64_t t = 2; t < 30; ++t) {
        expect(m::jerk_at(a, t), oracles::jerk_direct(a, t), "random jerk");
      }
    }
  }
  {  // stitched window summary vs hand values
    MatrixXd prefix = MatrixXd::Zero(5, 1);
    MatrixXd head = MatrixXd::Constant(5, 1, 1.0);
    auto sum = m::stitched_window_summary(prefix, head, 5);
    expect(sum.boundary_transition_jerk, 1.0, "stitched btj");
    expect(sum.jerk_contrast, 1.0, "stitched contrast");
  }
  report(1, "metric oracles (>=10 fixtures)", ok && checked >= 10,
         "fixture checks: " + std::to_string(checked));
}

// --------------------------------------------------------------------------
// Criterion 2: permutation exactness + null calibration.

void criterion_2() {
  bool exact_ok = true;
  double worst = 0.0;
  Rng rng(2202);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a, b;
    for (int i = 0; i < 4; ++i) {
      a.push_back(rng.next_normal());
      b.push_back(rng.next_normal() + 0.5);
    }
    double exact = oracles::exhaustive_permutation_p(a, b, true);
    auto mc = s::permutation_test(a, b, 20000, s::Sidedness::two_sided,
                                  2300 + static_cast<std::uint64_t>(rep),
                                  s::PermutationMode::monte_carlo);
    worst = std::max(worst, std::abs(mc.p_value - exact));
    if (std::abs(mc.p_value - exact) >= 0.01) {
      exact_ok = false;
    }
  }
  report(2, "MC(20k) vs exhaustive p, 20 fixtures", exact_ok,
         "max |diff| = " + io::format_double(worst));

  // Null calibration: both groups from one distribution; group sizes large
  // enough that the exhaustive mode does not engage.
  const int reps = 2000;
  std::vector<double> pvals;
  pvals.reserve(reps);
  Rng null_rng(2400);
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<double> a, b;
    for (int i = 0; i < 12; ++i) {
      a.push_back(null_rng.next_normal());
      b.push_back(null_rng.next_normal());
    }
    pvals.push_back(s::permutation_test(a, b, 500, s::Sidedness::two_sided,
                                        2500 + static_cast<std::uint64_t>(rep))
                        .p_value);
  }
  std::sort(pvals.begin(), pvals.end());
  double sup = 0.0;
  for (std::size_t i = 0; i < pvals.size(); ++i) {
    double hi = static_cast<double>(i + 1) / reps - pvals[i];
    double lo = pvals[i] - static_cast<double>(i) / reps;
    sup = std::max({sup, std::abs(hi), std::abs(lo)});
  }
  report(2, "null p-value uniformity (sup norm)", sup < 0.05,
         "sup deviation = " + io::format_double(sup));
}

// --------------------------------------------------------------------------
// Criterion 3: interval estimators.

void criterion_3() {
  bool wilson_ok = true;
  double worst = 0.0;
  for (std::int64_t n : {1, 2, 3, 5, 10, 43, 100, 350, 1000}) {
    for (std::int64_t k = 0; k <= n; k += std::max<std::int64_t>(1, n / 17)) {
      for (double level : {0.8, 0.9, 0.95, 0.99}) {
        auto est = s::wilson_ci(k, n, level);
        auto oracle = oracles::wilson_direct(k, n, level);
        worst = std::max({worst, std::abs(est.lo - oracle.lo),
                          std::abs(est.hi - oracle.hi)});
        if (std::abs(est.lo - oracle.lo) > 1e-12 ||
            std::abs(est.hi - oracle.hi) > 1e-12) {
          wilson_ok = false;
        }
      }
    }
  }
  report(3, "wilson vs closed-form oracle", wilson_ok,
         "max |diff| = " + io::format_double(worst));

  // Bootstrap coverage of the mean, nominal 95%.
  const int reps = 200;
  int covered = 0;
  Rng rng(3300);
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<double> sample;
    sample.reserve(1000);
    for (int i = 0; i < 1000; ++i) {
      sample.push_back(rng.next_normal());
    }
    auto ci = s::bootstrap_ci(sample, 1000, 0.95, 3400 + static_cast<std::uint64_t>(rep));
    if (ci.lo <= 0.0 && 0.0 <= ci.hi) {
      ++covered;
    }
  }
  report(3, "bootstrap coverage >= 93% of 200", covered >= 186,
         "covered " + std::to_string(covered) + "/200");
}

// --------------------------------------------------------------------------
// Criterion 4: outcome association on the headroom preset.

void criterion_4() {
  sim::EnvConfig env_config = sim::env_preset("headroom");
  sim::PolicyConfig policy_config;

  x::AssociationParams params;
  params.n_episodes = 200;
  params.seed = 401;
  params.n_perm = 20000;
  params.sidedness = s::Sidedness::greater;
  params.workers = 2;
  auto reportA = x::run_outcome_association(policy_config, env_config, 10, params);

  bool ok = reportA.rows.size() == 3;
  std::string detail;
  for (const auto& row : reportA.rows) {
    bool row_ok = row.applicable && row.delta > 0.0 && row.test.p_value < 0.01;
    ok = ok && row_ok;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s: d=%.3g p=%.3g  ", row.control.c_str(),
                  row.delta, row.test.p_value);
    detail += buf;
  }
  report(4, "headroom separation, all controls", ok, detail);

  // Null channel: same pipeline with the noise coupling off.
  sim::PolicyConfig quiet = policy_config;
  quiet.deviation_scale = 0.0;
  int high_p = 0;
  int with_both = 0;
  for (int i = 0; i < 20; ++i) {
    x::AssociationParams null_params = params;
    null_params.seed = 4100 + static_cast<std::uint64_t>(i);
    null_params.n_perm = 2000;
    auto reportN = x::run_outcome_association(quiet, env_config, 10, null_params);
    const auto& all_row = reportN.rows.front();
    if (all_row.applicable) {
      ++with_both;
      if (all_row.test.p_value > 0.05) {
        ++high_p;
      }
    }
  }
  report(4, "null channel: p>0.05 in >=18/20", with_both == 20 && high_p >= 18,
         "both outcomes in " + std::to_string(with_both) + "/20, p>0.05 in " +
             std::to_string(high_p) + "/20");
}

// --------------------------------------------------------------------------
// Criterion 5: fixed-context scan vs brute force; decomposition.

void criterion_5() {
  sim::EnvConfig env_config = sim::env_preset("headroom");
  sim::PolicyConfig policy_config;
  sim::Policy policy(policy_config, env_config, 10);

  x::ScanParams params;
  params.n_contexts = 16;
  params.n_samples = 24;
  params.seed = 594;
  auto scan = x::run_noise_scan(policy_config, env_config, 10, params);

  // Brute-force per-context std: 10,000 fresh draws of the varied noise
  // through the same probe, independent stream.
  auto contexts = x::reference_probe_contexts(policy, env_config, 5, params.seed,
                                              params.reference_episodes, 16);
  bool within = true;
  double worst_ratio = 0.0;
  int comparable = 0;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    std::vector<double> btj;
    std::vector<double> contrast;
    btj.reserve(10000);
    Rng mc_rng = Rng::derive(900001, "c5-mc", i);
    for (int draw = 0; draw < 10000; ++draw) {
      sim::NoiseVector z1;
      z1.values.resize(policy.latent_dim());
      for (std::int64_t j = 0; j < policy.latent_dim(); ++j) {
        z1.values[j] = mc_rng.next_normal();
      }
      auto probe = sim::first_boundary_probe(contexts[i].context, contexts[i].z0_ref,
                                             z1, policy, env_config, 5);
      if (probe.valid) {
        btj.push_back(probe.summary.boundary_transition_jerk);
        contrast.push_back(probe.summary.jerk_contrast);
      }
    }
    double mc_btj = s::sample_std(btj);
    double mc_contrast = s::sample_std(contrast);
    const auto& ctx_scan = scan.contexts[i];
    if (btj.size() < 2) {
      // Context whose probes all terminate inside the prefix: the runner
      // must agree that there is nothing to measure.
      if (ctx_scan.btj_std != 0.0 || ctx_scan.contrast_std != 0.0) {
        within = false;
      }
      continue;
    }
    ++comparable;
    double r1 = std::abs(ctx_scan.btj_std - mc_btj) / mc_btj;
    double r2 = std::abs(ctx_scan.contrast_std - mc_contrast) / mc_contrast;
    worst_ratio = std::max({worst_ratio, r1, r2});
    if (r1 >= 0.20 || r2 >= 0.20) {
      within = false;
    }
  }
  report(5, "scan stds within 20% of 10k MC",
         within && comparable >= 12 && scan.mean_contrast_std > 0.0,
         "worst rel. deviation = " + io::format_double(worst_ratio).substr(0, 6) +
             " over " + std::to_string(comparable) + " contexts");

  sim::PolicyConfig quiet = policy_config;
  quiet.deviation_scale = 0.0;
  auto flat = x::run_noise_scan(quiet, env_config, 10, params);
  bool zeros = true;
  for (const auto& context : flat.contexts) {
    zeros = zeros && context.btj_std == 0.0 && context.contrast_std == 0.0;
  }
  report(5, "zero deviation scan stds exactly 0", zeros,
         zeros ? "all 16 contexts exact" : "nonzero std found");

  // Decomposition with the nonlinear deviation flag on (task-8 shape).
  sim::PolicyConfig bent = policy_config;
  bent.tanh_gain = 1.5;
  x::DecompositionParams dparams;
  dparams.n_contexts = 4;
  dparams.n_samples = 8;
  dparams.seed = 520;
  auto rows = x::run_decomposition(bent, env_config, 10, dparams);
  bool nonzero = rows.size() == 3;
  for (const auto& row : rows) {
    nonzero = nonzero && row.btj_std > 0.0 && row.contrast_std > 0.0;
  }
  double quad_btj = std::sqrt(rows[0].btj_std * rows[0].btj_std +
                              rows[1].btj_std * rows[1].btj_std);
  double quad_contrast = std::sqrt(rows[0].contrast_std * rows[0].contrast_std +
                                   rows[1].contrast_std * rows[1].contrast_std);
  double dev_btj = std::abs(rows[2].btj_std - quad_btj) / rows[2].btj_std;
  double dev_contrast = std::abs(rows[2].contrast_std - quad_contrast) / rows[2].contrast_std;
  bool non_additive = dev_btj > 0.05 || dev_contrast > 0.05;
  report(5, "decomposition nonzero + non-additive", nonzero && non_additive,
         "btj stds z0/z1/both = " + io::format_double(rows[0].btj_std).substr(0, 6) +
             "/" + io::format_double(rows[1].btj_std).substr(0, 6) + "/" +
             io::format_double(rows[2].btj_std).substr(0, 6) +
             ", quadrature dev = " + io::format_double(dev_btj).substr(0, 6));
}

// --------------------------------------------------------------------------
// Criterion 6: directional structure.

// Recovers the artifact response structure of the affine generator from
// probe evaluations only (polarization of BTJ^2), yielding the gradient
// direction in latent space. With the affine generator the full response is
// rank one, so the orthogonal complement of the gradient is the kernel.
VectorXd polarization_gradient(const x::ProbeContext& pc, const sim::Policy& policy,
                               const sim::EnvConfig& env_config) {
  auto value = [&](const VectorXd& z) {
    sim::NoiseVector nv;
    nv.values = z;
    auto probe = sim::first_boundary_probe(pc.context, pc.z0_ref, nv, policy,
                                           env_config, 5);
    return probe.summary.boundary_transition_jerk;
  };
  std::int64_t latent = pc.z1_ref.values.size();
  VectorXd grad(latent);
  for (std::int64_t j = 0; j < latent; ++j) {
    VectorXd zp = pc.z1_ref.values;
    VectorXd zm = pc.z1_ref.values;
    zp[j] += 1.0;
    zm[j] -= 1.0;
    double fp = value(zp);
    double fm = value(zm);
    grad[j] = (fp * fp - fm * fm) / 4.0;  // = <s0, M e_j> for affine s(z)
  }
  return grad;
}

void criterion_6() {
  sim::EnvConfig env_config = sim::env_preset("headroom");
  sim::PolicyConfig policy_config;
  sim::Policy policy(policy_config, env_config, 10);
  std::vector<double> grid{-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0};

  auto pool = x::reference_probe_contexts(policy, env_config, 5, 601, 12, 12);
  std::vector<x::ProbeContext> contexts;
  for (const auto& pc : pool) {
    auto ref = sim::first_boundary_probe(pc.context, pc.z0_ref, pc.z1_ref, policy,
                                         env_config, 5);
    if (ref.valid && contexts.size() < 4) {
      contexts.push_back(pc);
    }
  }

  // (a) analytic-gradient direction: |r| >= 0.99 for the boundary jerk.
  // The affine regime holds while the norm's fold sits outside the alpha
  // grid, so the fixture is the first context whose gradient-direction
  // response is monotone across [-1, 1] (checked with oracle probes).
  {
    double r_btj = 0.0;
    bool found = false;
    for (const auto& pc : contexts) {
      VectorXd grad = polarization_gradient(pc, policy, env_config);
      if (grad.norm() < 1e-12) {
        continue;
      }
      sim::SteeringDirection direction;
      direction.direction = grad.normalized();
      direction.direction_id = "analytic";
      auto probe_btj = [&](double alpha) {
        sim::NoiseVector z;
        z.values = pc.z1_ref.values + alpha * direction.direction;
        auto probe = sim::first_boundary_probe(pc.context, pc.z0_ref, z, policy,
                                               env_config, 5);
        return probe.summary.boundary_transition_jerk;
      };
      double lo = probe_btj(-1.0), mid = probe_btj(0.0), hi = probe_btj(1.0);
      bool monotone = (lo < mid && mid < hi) || (lo > mid && mid > hi);
      if (!monotone) {
        continue;
      }
      auto sweep = x::run_alpha_sweep(pc, direction, grid, policy, env_config, 5);
      if (std::isfinite(sweep.pearson_btj)) {
        r_btj = std::abs(sweep.pearson_btj);
        found = true;
        break;
      }
    }
    report(6, "analytic direction |r_btj| >= 0.99", found && r_btj >= 0.99,
           "|r| = " + io::format_double(r_btj).substr(0, 10));
  }

  // (b) searched directions: mean |r| over 4 contexts >= 0.9 in >= 8/10 seeds.
  {
    int good_seeds = 0;
    std::string means;
    for (int seed_idx = 0; seed_idx < 10; ++seed_idx) {
      double sum_abs_r = 0.0;
      int counted = 0;
      for (std::size_t c = 0; c < contexts.size(); ++c) {
        Rng rng = Rng::derive(6100 + static_cast<std::uint64_t>(seed_idx), "dirsearch", c);
        auto direction = x::search_direction(contexts[c], policy, env_config, 5, 12,
                                             0.5, rng);
        auto sweep = x::run_alpha_sweep(contexts[c], direction, grid, policy,
                                        env_config, 5);
        if (std::isfinite(sweep.pearson_contrast)) {
          sum_abs_r += std::abs(sweep.pearson_contrast);
          ++counted;
        }
      }
      double mean_abs_r = counted > 0 ? sum_abs_r / counted : 0.0;
      means += io::format_double(mean_abs_r).substr(0, 5) + " ";
      if (counted == 4 && mean_abs_r >= 0.9) {
        ++good_seeds;
      }
    }
    report(6, "searched direction mean |r| >= 0.9", good_seeds >= 8,
           std::to_string(good_seeds) + "/10 seeds (means: " + means + ")");
  }

  // (c) zero-response direction: artifact range < 1e-6 across the sweep.
  {
    const auto& pc = contexts[1];
    VectorXd grad = polarization_gradient(pc, policy, env_config);
    Rng rng(666);
    VectorXd random(grad.size());
    for (std::int64_t i = 0; i < grad.size(); ++i) {
      random[i] = rng.next_normal();
    }
    VectorXd kernel = random - (random.dot(grad) / grad.squaredNorm()) * grad;
    sim::SteeringDirection direction;
    direction.direction = kernel.normalized();
    direction.direction_id = "kernel";
    auto sweep = x::run_alpha_sweep(pc, direction, grid, policy, env_config, 5);
    bool ok = sweep.btj_range < 1e-6 && sweep.contrast_range < 1e-6;
    report(6, "kernel direction range < 1e-6", ok,
           "btj range = " + io::format_double(sweep.btj_range) +
               ", contrast range = " + io::format_double(sweep.contrast_range));
  }
}

// --------------------------------------------------------------------------
// Criterion 7: trajectory-level steering, headroom and ceiling regimes.

void criterion_7() {
  sim::PolicyConfig policy_config;

  {  // headroom: orderings across 10 seed replications
    sim::EnvConfig env_config = sim::env_preset("headroom");
    int contrast_ok = 0;
    int success_ok = 0;
    for (int i = 0; i < 10; ++i) {
      x::SteeringParams params;
      params.n_episodes_per_arm = 50;
      params.seed = 7100 + static_cast<std::uint64_t>(i);
      params.n_boot = 500;
      params.workers = 2;
      auto run = x::run_trajectory_steering(policy_config, env_config, 10, params);
      contrast_ok += run.contrast_ordering_holds ? 1 : 0;
      success_ok += run.success_ordering_holds ? 1 : 0;
    }
    report(7, "headroom contrast ordering >= 9/10", contrast_ok >= 9,
           std::to_string(contrast_ok) + "/10");
    report(7, "headroom success ordering >= 8/10", success_ok >= 8,
           std::to_string(success_ok) + "/10");
  }

  {  // ceiling: saturated good/baseline, visible bad effect
    sim::EnvConfig env_config = sim::env_preset("ceiling");
    int contrast_ok = 0;
    int bad_below = 0;
    std::int64_t base_n = 0, base_succ = 0, good_n = 0, good_succ = 0;
    for (int i = 0; i < 10; ++i) {
      x::SteeringParams params;
      params.n_episodes_per_arm = 50;
      params.seed = 7200 + static_cast<std::uint64_t>(i);
      params.n_boot = 500;
      params.workers = 2;
      auto run = x::run_trajectory_steering(policy_config, env_config, 10, params);
      contrast_ok += run.contrast_ordering_holds ? 1 : 0;
      const x::GroupReport* base = nullptr;
      const x::GroupReport* good = nullptr;
      const x::GroupReport* bad = nullptr;
      for (const auto& group : run.groups) {
        if (group.arm == "baseline") base = &group;
        if (group.arm == "good") good = &group;
        if (group.arm == "bad") bad = &group;
      }
      base_n += base->n;
      base_succ += base->successes;
      good_n += good->n;
      good_succ += good->successes;
      if (bad->success_rate.point < base->success_rate.point) {
        ++bad_below;
      }
    }
    double base_rate = static_cast<double>(base_succ) / static_cast<double>(base_n);
    double good_rate = static_cast<double>(good_succ) / static_cast<double>(good_n);
    report(7, "ceiling baseline/good >= 0.98", base_rate >= 0.98 && good_rate >= 0.98,
           "baseline " + io::format_double(base_rate).substr(0, 6) + ", good " +
               io::format_double(good_rate).substr(0, 6));
    report(7, "ceiling contrast ordering >= 9/10", contrast_ok >= 9,
           std::to_string(contrast_ok) + "/10");
    report(7, "ceiling bad < baseline >= 8/10", bad_below >= 8,
           std::to_string(bad_below) + "/10");
  }
}

// --------------------------------------------------------------------------
// Criterion 8: reproducibility and I/O.

void criterion_8() {
  namespace fs = std::filesystem;
  auto dir1 = fs::temp_directory_path() / "chunkseam-accept-a";
  auto dir2 = fs::temp_directory_path() / "chunkseam-accept-b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);

  nlohmann::json config;
  config["episodes"] = 4;
  config["seed"] = 88;
  config["contexts"] = 3;
  config["samples"] = 4;
  config["episodes_per_arm"] = 3;
  config["n_perm"] = 500;
  config["n_boot"] = 200;
  config["reference_episodes"] = 6;

  bool identical = true;
  for (const char* command : {"rollout", "scan", "steer"}) {
    config["output_dir"] = dir1.string();
    run::run_command(command, config, {});
    config["output_dir"] = dir2.string();
    run::run_command(command, config, {});
  }
  std::vector<std::string> files{"rollout_manifest.json", "traces/ep0002.trace",
                                 "scan.json", "scan.csv", "steering.json",
                                 "groups.csv"};
  for (const auto& file : files) {
    auto a = io::read_text_file(dir1 / file);
    // Output paths are embedded in the config echo; normalize them out.
    auto b = io::read_text_file(dir2 / file);
    std::string da = dir1.string();
    std::string db = dir2.string();
    std::size_t pos;
    while ((pos = a.find(da)) != std::string::npos) a.replace(pos, da.size(), "OUT");
    while ((pos = b.find(db)) != std::string::npos) b.replace(pos, db.size(), "OUT");
    if (a != b) {
      identical = false;
      std::printf("  c8 mismatch in %s\n", file.c_str());
    }
  }
  report(8, "identical config+seed -> identical bytes", identical,
         identical ? "rollout/scan/steer outputs match" : "byte mismatch");

  // Exact trace round trip.
  auto trace = io::read_trace(dir1 / "traces" / "ep0001.trace");
  std::string once = io::trace_to_string(trace);
  auto again = io::trace_from_string(once, "mem");
  bool round = once == io::trace_to_string(again) &&
               again.executed == trace.executed &&
               m::episode_contrast(again, {}).jerk_contrast ==
                   m::episode_contrast(trace, {}).jerk_contrast;
  report(8, "trace round-trip exact", round, round ? "byte-equal, stats equal" : "drift");

  // Golden fixture parses.
  const char* src = std::getenv("CHUNKSEAM_SRC");
  fs::path golden = src ? fs::path(src) / "tests" / "golden" / "minimal_external.trace"
                        : fs::path("golden/minimal_external.trace");
  bool golden_ok = false;
  std::string golden_detail = "missing fixture";
  if (fs::exists(golden)) {
    auto hand = io::read_trace(golden);
    golden_ok = hand.steps() == 3 && hand.source == "external" && !hand.success;
    golden_detail = "parsed " + std::to_string(hand.steps()) + " steps";
  }
  report(8, "golden fixture parses", golden_ok, golden_detail);

  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

}  // namespace

int main() {
  std::printf("chunkseam acceptance suite (%s)\n", kVersion);
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  if (g_failures > 0) {
    std::printf("ACCEPTANCE: %d check(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("ACCEPTANCE: all criteria passed\n");
  return 0;
}
