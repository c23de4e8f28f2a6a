#include <doctest.h>

#include <cmath>

#include "core/error.hpp"
#include "core/metrics.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace chunkseam;
namespace m = chunkseam::metrics;

namespace {

RolloutTrace make_trace(const MatrixXd& actions, std::int64_t k,
                        std::optional<std::vector<std::uint8_t>> contact = {}) {
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
  trace.contact_mask = std::move(contact);
  return trace;
}

}  // namespace

TEST_CASE("constant trajectory has zero jerk everywhere") {
  MatrixXd actions = MatrixXd::Constant(20, 2, 3.7);
  auto trace = make_trace(actions, 5);
  for (auto [t, j] : m::jerk_series(trace, {0, 20})) {
    CHECK(j == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(t >= 2);
  }
}

TEST_CASE("linear ramp has zero jerk everywhere") {
  MatrixXd actions(15, 2);
  for (std::int64_t t = 0; t < 15; ++t) {
    actions(t, 0) = 0.4 * static_cast<double>(t) + 1.0;
    actions(t, 1) = -0.2 * static_cast<double>(t);
  }
  auto trace = make_trace(actions, 5);
  for (auto [t, j] : m::jerk_series(trace, {0, 15})) {
    CHECK(j == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("hand-computed second difference: (0,0,1,1)") {
  MatrixXd actions(4, 1);
  actions << 0, 0, 1, 1;
  auto trace = make_trace(actions, 4);
  auto series = m::jerk_series(trace, {0, 4});
  REQUIRE(series.size() == 2);
  CHECK(series[0].first == 2);
  CHECK(series[0].second == doctest::Approx(1.0));
  CHECK(series[1].first == 3);
  CHECK(series[1].second == doctest::Approx(1.0));
}

TEST_CASE("window semantics: jerk timesteps filtered, history always used") {
  MatrixXd actions(12, 1);
  for (std::int64_t t = 0; t < 12; ++t) {
    actions(t, 0) = static_cast<double>(t * t);  // second difference = 2
  }
  auto trace = make_trace(actions, 4);
  auto series = m::jerk_series(trace, {6, 9});
  REQUIRE(series.size() == 3);
  for (auto [t, j] : series) {
    CHECK(j == doctest::Approx(2.0));
  }
  CHECK_THROWS_AS(m::jerk_series(trace, {6, 8}), Error);  // window too short
}

TEST_CASE("phase profile bins jerk pulses at boundary phases") {
  // K=5, jerk exactly 1 at t in {5,6,10,11}, zero elsewhere.
  std::vector<double> jerks(15, 0.0);
  jerks[5] = jerks[6] = jerks[10] = jerks[11] = 1.0;
  auto actions = oracles::actions_with_jerk(jerks);
  auto trace = make_trace(actions, 5);
  auto profile = m::phase_profile(trace, {0, 15});
  REQUIRE(profile.cycle_length() == 5);
  CHECK(profile.mean_jerk_by_phase[0] == doctest::Approx(1.0));
  CHECK(profile.mean_jerk_by_phase[1] == doctest::Approx(1.0));
  CHECK(profile.mean_jerk_by_phase[2] == doctest::Approx(0.0));
  CHECK(profile.mean_jerk_by_phase[3] == doctest::Approx(0.0));
  CHECK(profile.mean_jerk_by_phase[4] == doctest::Approx(0.0));
  // Cross-check against the independent binning oracle.
  std::vector<std::uint8_t> all(15, 1);
  auto oracle = oracles::bin_direct(actions, 5, all);
  for (std::size_t p = 0; p < 5; ++p) {
    CHECK(profile.counts_by_phase[p] == oracle.count[p]);
    if (oracle.count[p] > 0) {
      CHECK(profile.mean_jerk_by_phase[p] == doctest::Approx(oracle.mean[p]));
    }
  }
}

TEST_CASE("all-zero jerk gives an all-zero profile") {
  MatrixXd actions = MatrixXd::Zero(16, 2);
  auto trace = make_trace(actions, 4);
  auto profile = m::phase_profile(trace, {0, 16});
  for (std::int64_t p = 0; p < 4; ++p) {
    CHECK(profile.present(p));
    CHECK(profile.mean_jerk_by_phase[static_cast<std::size_t>(p)] ==
          doctest::Approx(0.0));
  }
}

TEST_CASE("window without boundary timesteps leaves phases 0,1 absent") {
  MatrixXd actions = MatrixXd::Zero(20, 1);
  auto trace = make_trace(actions, 5);
  // Window [7,10) covers phases 2,3,4 only.
  auto profile = m::phase_profile(trace, {7, 10});
  CHECK_FALSE(profile.present(0));
  CHECK_FALSE(profile.present(1));
  CHECK(profile.present(2));
  CHECK_THROWS_AS(m::jerk_contrast(profile), Error);
}

TEST_CASE("contrast of pulse and interior-heavy profiles") {
  PhaseProfile pulse;
  pulse.mean_jerk_by_phase = {1.0, 1.0, 0.0, 0.0, 0.0};
  pulse.counts_by_phase = {2, 2, 3, 3, 3};
  CHECK(m::jerk_contrast(pulse) == doctest::Approx(1.0));

  PhaseProfile uniform;
  uniform.mean_jerk_by_phase = {0.7, 0.7, 0.7, 0.7, 0.7};
  uniform.counts_by_phase = {1, 1, 1, 1, 1};
  CHECK(m::jerk_contrast(uniform) == doctest::Approx(0.0));

  PhaseProfile interior;
  interior.mean_jerk_by_phase = {0.0, 0.0, 1.0, 1.0, 1.0};
  interior.counts_by_phase = {1, 1, 1, 1, 1};
  CHECK(m::jerk_contrast(interior) == doctest::Approx(-1.0));
}

TEST_CASE("contrast is invariant to constant shifts of the profile") {
  Rng rng(4);
  PhaseProfile profile;
  profile.counts_by_phase = {1, 1, 1, 1, 1};
  for (int p = 0; p < 5; ++p) {
    profile.mean_jerk_by_phase.push_back(rng.next_double());
  }
  double base = m::jerk_contrast(profile);
  for (auto& v : profile.mean_jerk_by_phase) {
    v += 13.25;
  }
  CHECK(m::jerk_contrast(profile) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("jerk scales linearly with action scaling") {
  Rng rng(17);
  MatrixXd actions(25, 2);
  for (std::int64_t t = 0; t < 25; ++t) {
    actions(t, 0) = rng.next_normal();
    actions(t, 1) = rng.next_normal();
  }
  auto trace = make_trace(actions, 5);
  double base = m::episode_contrast(trace, {}).jerk_contrast;
  auto scaled = make_trace(3.5 * actions, 5);
  CHECK(m::episode_contrast(scaled, {}).jerk_contrast ==
        doctest::Approx(3.5 * base).epsilon(1e-12));
}

TEST_CASE("boundary transition jerk at the stitch") {
  // Constant prefix stitched to a constant continuation: zero.
  MatrixXd flat = MatrixXd::Constant(12, 1, 2.0);
  auto trace = make_trace(flat, 4);
  CHECK(m::boundary_transition_jerk(trace, 4) == doctest::Approx(0.0));

  // Prefix of zeros, next chunk starts at 1 exactly at t=K.
  MatrixXd step = MatrixXd::Zero(10, 1);
  for (std::int64_t t = 5; t < 10; ++t) {
    step(t, 0) = 1.0;
  }
  auto step_trace = make_trace(step, 5);
  CHECK(m::boundary_transition_jerk(step_trace, 5) == doctest::Approx(1.0));

  CHECK_THROWS_AS(m::boundary_transition_jerk(step_trace, 6), Error);
  CHECK_THROWS_AS(m::boundary_transition_jerk(step_trace, 0), Error);
}

TEST_CASE("smooth continuation boundary jerk equals the series value") {
  MatrixXd actions(20, 2);
  Rng rng(23);
  for (std::int64_t t = 0; t < 20; ++t) {
    actions(t, 0) = 0.1 * t + 0.003 * t * t;
    actions(t, 1) = rng.next_normal() * 0.0 + std::sin(0.2 * t);
  }
  auto trace = make_trace(actions, 5);
  auto series = m::jerk_series(trace, {0, 20});
  double at_10 = 0.0;
  for (auto [t, j] : series) {
    if (t == 10) at_10 = j;
  }
  CHECK(m::boundary_transition_jerk(trace, 10) == doctest::Approx(at_10));
}

TEST_CASE("episode contrast without contact equals the all-window result") {
  std::vector<double> jerks(20, 0.1);
  jerks[5] = jerks[10] = jerks[15] = 0.9;
  auto actions = oracles::actions_with_jerk(jerks);
  std::vector<std::uint8_t> no_contact(20, 0);
  auto trace = make_trace(actions, 5, no_contact);
  auto all = m::episode_contrast(trace, {m::ControlWindow::all});
  auto free = m::episode_contrast(trace, {m::ControlWindow::contact_free});
  CHECK(all.jerk_contrast == doctest::Approx(free.jerk_contrast));
  CHECK(all.boundary_transition_jerk == doctest::Approx(free.boundary_transition_jerk));
}

TEST_CASE("contact-free window applies the guard margin") {
  // Contact from t=30 onward; guard margin 2 keeps t in [0, 28).
  std::int64_t t_count = 40;
  MatrixXd actions = MatrixXd::Zero(t_count, 1);
  std::vector<std::uint8_t> contact(static_cast<std::size_t>(t_count), 0);
  for (std::int64_t t = 30; t < t_count; ++t) {
    contact[static_cast<std::size_t>(t)] = 1;
  }
  auto trace = make_trace(actions, 5, contact);
  m::ControlOptions options;
  options.window = m::ControlWindow::contact_free_first_n;
  options.first_n = 50;
  options.guard_margin = 2;
  auto mask = m::control_mask(trace, options);
  // Mask-intersection oracle: contact-free minus guard, first 50.
  for (std::int64_t t = 0; t < t_count; ++t) {
    bool expected = t < 28;
    CHECK(static_cast<bool>(mask[static_cast<std::size_t>(t)]) == expected);
  }
  auto summary = m::episode_contrast(trace, options);
  CHECK(summary.window_start == 0);
  CHECK(summary.window_end == 28);
}

TEST_CASE("first-N control keeps exactly N contact-free steps when available") {
  std::int64_t t_count = 80;
  MatrixXd actions = MatrixXd::Zero(t_count, 1);
  std::vector<std::uint8_t> contact(static_cast<std::size_t>(t_count), 0);
  auto trace = make_trace(actions, 5, contact);
  m::ControlOptions options;
  options.window = m::ControlWindow::contact_free_first_n;
  options.first_n = 50;
  auto mask = m::control_mask(trace, options);
  std::int64_t kept = 0;
  for (auto b : mask) kept += b;
  CHECK(kept == 50);
}

TEST_CASE("boundary-pulse summary matches contrast of its own profile") {
  std::vector<double> jerks(30, 0.05);
  for (std::int64_t t = 5; t < 30; t += 5) {
    jerks[static_cast<std::size_t>(t)] = 0.6;
    jerks[static_cast<std::size_t>(t) + 1] = 0.4;
  }
  auto actions = oracles::actions_with_jerk(jerks);
  auto trace = make_trace(actions, 5);
  auto summary = m::episode_contrast(trace, {});
  CHECK(summary.jerk_contrast ==
        doctest::Approx(m::jerk_contrast(summary.phase_profile)).epsilon(1e-12));
  std::vector<std::uint8_t> all(30, 1);
  auto oracle = oracles::bin_direct(actions, 5, all);
  CHECK(summary.jerk_contrast == doctest::Approx(oracles::contrast_direct(oracle.mean, 5)));
}

TEST_CASE("phase-independent jerk yields zero contrast") {
  std::vector<double> jerks(42, 0.0);
  for (std::size_t t = 2; t < jerks.size(); ++t) {
    jerks[t] = 0.31;
  }
  auto actions = oracles::actions_with_jerk(jerks);
  auto trace = make_trace(actions, 5);
  CHECK(std::abs(m::episode_contrast(trace, {}).jerk_contrast) < 1e-9);
}

TEST_CASE("phase binning partitions the valid jerk timesteps") {
  Rng rng(31);
  MatrixXd actions(37, 2);
  for (std::int64_t t = 0; t < 37; ++t) {
    actions(t, 0) = rng.next_normal();
    actions(t, 1) = rng.next_normal();
  }
  auto trace = make_trace(actions, 5);
  auto profile = m::phase_profile(trace, {0, 37});
  CHECK(profile.total_count() == 35);  // t = 2..36
}

TEST_CASE("empty control window is an error") {
  MatrixXd actions = MatrixXd::Zero(12, 1);
  std::vector<std::uint8_t> contact(12, 1);  // contact everywhere
  auto trace = make_trace(actions, 4, contact);
  CHECK_THROWS_AS(m::episode_contrast(trace, {m::ControlWindow::contact_free}), Error);
}

TEST_CASE("contact-dependent control without a mask is a capability error") {
  MatrixXd actions = MatrixXd::Zero(12, 1);
  auto trace = make_trace(actions, 4);
  try {
    m::episode_contrast(trace, {m::ControlWindow::contact_free});
    FAIL("expected capability error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::capability);
  }
}

TEST_CASE("matched-horizon truncation: min rule, idempotence, recomputability") {
  Rng rng(77);
  std::vector<RolloutTrace> traces;
  for (std::int64_t len : {40, 60, 55}) {
    MatrixXd actions(len, 2);
    for (std::int64_t t = 0; t < len; ++t) {
      actions(t, 0) = rng.next_normal();
      actions(t, 1) = rng.next_normal();
    }
    std::vector<std::uint8_t> contact(static_cast<std::size_t>(len), 0);
    traces.push_back(make_trace(actions, 5, contact));
  }
  traces[0].success = true;

  auto cut = m::matched_horizon_truncate(traces);
  for (const auto& trace : cut) {
    CHECK(trace.steps() == 40);
    CHECK(trace.contact_mask->size() == 40);
    CHECK(static_cast<std::int64_t>(trace.chunk_records.size()) == 8);
    trace.validate();
    CHECK_NOTHROW(m::episode_contrast(trace, {}));
  }
  auto again = m::matched_horizon_truncate(cut);
  for (std::size_t i = 0; i < cut.size(); ++i) {
    CHECK(again[i].executed == cut[i].executed);
  }

  // Equal lengths: identity.
  auto same = m::matched_horizon_truncate({cut[0], cut[1]});
  CHECK(same[0].executed == cut[0].executed);

  CHECK_THROWS_AS(m::matched_horizon_truncate({}), Error);
}

TEST_CASE("stitched window summary places the boundary at the stitch") {
  MatrixXd prefix = MatrixXd::Zero(5, 1);
  MatrixXd head = MatrixXd::Constant(5, 1, 1.0);
  auto summary = m::stitched_window_summary(prefix, head, 5);
  CHECK(summary.boundary_transition_jerk == doctest::Approx(1.0));
  CHECK(summary.window_end == 10);
  // j at t=5 (stitch) is 1, at t=6 is |1-2+0|=1, interior zero.
  CHECK(summary.jerk_contrast == doctest::Approx(1.0));
}
