#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "core/error.hpp"
#include "core/metrics.hpp"
#include "oracles.hpp"
#include "io/report_io.hpp"
#include "io/trace_io.hpp"
#include "sim/env.hpp"
#include "sim/policy.hpp"
#include "sim/rollout.hpp"

using namespace chunkseam;
namespace fs = std::filesystem;

namespace {

RolloutTrace testbed_trace(std::uint64_t seed, std::uint64_t episode) {
  sim::EnvConfig env_config = sim::env_preset("headroom");
  sim::PolicyConfig policy_config;
  sim::Policy policy(policy_config, env_config, 10);
  auto result = sim::rollout(policy, env_config, 5, seed, episode);
  result.trace.config_hash = "fixturehash";
  return result.trace;
}

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "chunkseam-unit-traceio";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("trace round-trip is exact and canonical") {
  auto trace = testbed_trace(123, 4);
  std::string once = io::trace_to_string(trace);
  auto parsed = io::trace_from_string(once, "mem");
  std::string twice = io::trace_to_string(parsed);
  CHECK(once == twice);  // byte-equal re-serialization
  CHECK(parsed.executed == trace.executed);
  CHECK(parsed.success == trace.success);
  CHECK(parsed.stride_k == trace.stride_k);
  CHECK(parsed.horizon_h == trace.horizon_h);
  CHECK(parsed.episode_id == trace.episode_id);
  CHECK(parsed.config_hash == trace.config_hash);
  CHECK(parsed.seed.root == trace.seed.root);
  CHECK(*parsed.contact_mask == *trace.contact_mask);
  REQUIRE(parsed.chunk_records.size() == trace.chunk_records.size());
  for (std::size_t i = 0; i < parsed.chunk_records.size(); ++i) {
    CHECK(parsed.chunk_records[i].context_id == trace.chunk_records[i].context_id);
    CHECK(parsed.chunk_records[i].noise_id == trace.chunk_records[i].noise_id);
  }
  // Statistics survive the round trip unchanged.
  auto before = metrics::episode_contrast(trace, {});
  auto after = metrics::episode_contrast(parsed, {});
  CHECK(before.jerk_contrast == after.jerk_contrast);
}

TEST_CASE("trace file write/read through the filesystem") {
  auto dir = temp_dir();
  auto trace = testbed_trace(55, 0);
  auto path = dir / "ep.trace";
  io::write_trace(trace, path);
  auto parsed = io::read_trace(path);
  CHECK(parsed.executed == trace.executed);
  fs::remove_all(dir);
}

TEST_CASE("golden hand-written minimal file parses to a valid trace") {
  fs::path golden;
  std::vector<fs::path> candidates;
  if (const char* src_root = std::getenv("CHUNKSEAM_SRC")) {
    candidates.push_back(fs::path(src_root) / "tests" / "golden" / "minimal_external.trace");
  }
  candidates.push_back("golden/minimal_external.trace");
  candidates.push_back("tests/golden/minimal_external.trace");
  candidates.push_back("../../tests/golden/minimal_external.trace");
  for (const auto& candidate : candidates) {
    if (fs::exists(candidate)) {
      golden = candidate;
      break;
    }
  }
  REQUIRE(fs::exists(golden));
  auto trace = io::read_trace(golden);
  CHECK(trace.source == "external");
  CHECK(trace.steps() == 3);
  CHECK(trace.stride_k == 3);
  CHECK_FALSE(trace.has_contact_mask());
  CHECK_FALSE(trace.success);
  CHECK(trace.executed(2, 0) == 1.0);
}

TEST_CASE("external trace without contact mask refuses contact controls") {
  auto trace = testbed_trace(9, 1);
  trace.contact_mask.reset();
  trace.source = "external";
  std::string text = io::trace_to_string(trace);
  auto parsed = io::trace_from_string(text, "mem");
  CHECK_FALSE(parsed.has_contact_mask());
  try {
    metrics::episode_contrast(parsed, {metrics::ControlWindow::contact_free});
    FAIL("expected capability error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::capability);
  }
  CHECK_NOTHROW(metrics::episode_contrast(parsed, {}));
}

TEST_CASE("parse errors name the offending line") {
  auto trace = testbed_trace(77, 2);
  std::string text = io::trace_to_string(trace);

  SUBCASE("truncated file") {
    auto cut = text.substr(0, text.size() / 2);
    // Only keep whole lines.
    cut = cut.substr(0, cut.rfind('\n') + 1);
    try {
      io::trace_from_string(cut, "trunc");
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("trunc") != std::string::npos);
      CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
  }

  SUBCASE("bad version") {
    auto bad = text;
    bad.replace(bad.find("\"version\":1"), 11, "\"version\":9");
    try {
      io::trace_from_string(bad, "vers");
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
      CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
  }

  SUBCASE("non-finite action") {
    auto bad = text;
    auto pos = bad.find("\"action\":[");
    auto end = bad.find(']', pos);
    bad.replace(pos, end - pos + 1, "\"action\":[null,0.0]");
    try {
      io::trace_from_string(bad, "nonfinite");
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
  }

  SUBCASE("garbage line") {
    auto bad = text;
    bad.insert(bad.find('\n') + 1, "not json\n");
    try {
      io::trace_from_string(bad, "garbage");
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
}

TEST_CASE("steering tags survive the round trip") {
  auto trace = testbed_trace(31, 3);
  SteeringTag tag;
  tag.alpha = -0.5;
  tag.direction_id = "ep0003/b002/dir7";
  trace.chunk_records.at(3).steering = tag;
  auto parsed = io::trace_from_string(io::trace_to_string(trace), "mem");
  REQUIRE(parsed.chunk_records.at(3).steering.has_value());
  CHECK(parsed.chunk_records.at(3).steering->alpha == -0.5);
  CHECK(parsed.chunk_records.at(3).steering->direction_id == "ep0003/b002/dir7");
  CHECK_FALSE(parsed.chunk_records.at(2).steering.has_value());
}

TEST_CASE("csv writers emit plot-ready shapes") {
  experiments::GroupReport good;
  good.arm = "good";
  good.n = 3;
  good.successes = 3;
  good.success_rate = stats::wilson_ci(3, 3, 0.95);
  good.raw_contrasts = {0.1, 0.2, 0.15};
  good.contrast_mean = stats::bootstrap_ci(good.raw_contrasts, 200, 0.95, 1);
  auto csv = io::groups_csv({good});
  CHECK(csv.find("arm,n,success_rate,success_lo,success_hi,contrast,contrast_lo,"
                 "contrast_hi") == 0);
  CHECK(csv.find("good,3,1") != std::string::npos);

  // Empty input: header only.
  auto empty = io::groups_csv({});
  CHECK(empty == "arm,n,success_rate,success_lo,success_hi,contrast,contrast_lo,"
                 "contrast_hi\n");
}

TEST_CASE("steering report json round-trips the raw per-episode values") {
  experiments::GroupReport bad;
  bad.arm = "bad";
  bad.n = 2;
  bad.successes = 1;
  bad.raw_contrasts = {0.4, 0.6};
  bad.raw_success = {1, 0};
  bad.success_rate = stats::wilson_ci(1, 2, 0.95);
  bad.contrast_mean = stats::bootstrap_ci(bad.raw_contrasts, 200, 0.95, 1);
  experiments::SteeringRunResult run;
  run.groups.push_back(bad);
  run.regime = "headroom";
  auto round = io::steering_run_from_json(io::to_json(run));
  REQUIRE(round.groups.size() == 1);
  CHECK(round.groups[0].raw_contrasts == bad.raw_contrasts);
  CHECK(round.groups[0].successes == 1);
  CHECK(round.regime == "headroom");
}

TEST_CASE("external traces honor a nonzero phase offset") {
  // Boundaries at t = 2, 6, 10: phase(t) = (t - 2) mod 4.
  RolloutTrace trace;
  std::int64_t t_count = 14;
  std::vector<double> jerks(static_cast<std::size_t>(t_count), 0.0);
  jerks[6] = jerks[10] = 1.0;  // pulses exactly at the offset boundaries
  trace.executed = oracles::actions_with_jerk(jerks);
  trace.stride_k = 4;
  trace.horizon_h = 8;
  trace.phase_offset = 2;
  trace.source = "external";
  trace.episode_id = "offset";
  ChunkRecord record;
  trace.chunk_records.push_back(record);
  trace.validate();

  CHECK(trace.phase(2) == 0);
  CHECK(trace.phase(6) == 0);
  CHECK(trace.phase(5) == 3);
  auto profile = metrics::phase_profile(trace, {0, t_count});
  CHECK(profile.mean_jerk_by_phase[0] > 0.0);
  CHECK(profile.mean_jerk_by_phase[2] == doctest::Approx(0.0));
  CHECK(metrics::boundary_transition_jerk(trace, 6) == doctest::Approx(1.0));
  CHECK_THROWS_AS(metrics::boundary_transition_jerk(trace, 4), Error);

  // Round trip preserves the convention.
  auto parsed = io::trace_from_string(io::trace_to_string(trace), "mem");
  CHECK(parsed.phase_offset == 2);
  CHECK(parsed.phase(6) == 0);
}
