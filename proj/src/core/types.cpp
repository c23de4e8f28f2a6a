#include "core/types.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace chunkseam {

namespace {

void require(bool cond, const std::string& message) {
  if (!cond) {
    throw_error(ErrorCode::invalid_argument, message);
  }
}

}  // namespace

void ActionChunk::validate() const {
  require(actions.rows() >= 2, "action chunk: horizon must be >= 2");
  require(actions.cols() >= 1, "action chunk: action dim must be >= 1");
  require(actions.allFinite(), "action chunk: non-finite action entries");
  require(chunk_index >= 0, "action chunk: negative chunk index");
}

void RolloutTrace::validate() const {
  require(stride_k >= 1, "trace: stride must be >= 1");
  require(horizon_h >= stride_k, "trace: horizon must be >= stride");
  require(executed.rows() >= stride_k, "trace: fewer steps than one stride");
  require(executed.cols() >= 1, "trace: action dim must be >= 1");
  require(executed.allFinite(), "trace: non-finite executed actions");
  if (contact_mask) {
    require(static_cast<std::int64_t>(contact_mask->size()) == steps(),
            "trace: contact mask length != steps");
  }
  // Every executed step must map to exactly one chunk record, with chunk
  // index t / K (boundaries at multiples of K in the offset-0 convention).
  if (source == "testbed") {
    require(phase_offset == 0, "trace: testbed traces use phase offset 0");
  }
  std::int64_t t_count = steps();
  std::int64_t expected_chunks = (t_count - 1 + phase_offset) / stride_k + 1;
  if (phase_offset == 0) {
    require(static_cast<std::int64_t>(chunk_records.size()) == expected_chunks,
            "trace: chunk records do not cover executed steps (have " +
                std::to_string(chunk_records.size()) + ", need " +
                std::to_string(expected_chunks) + ")");
    for (std::size_t i = 0; i < chunk_records.size(); ++i) {
      require(chunk_records[i].chunk_index == static_cast<std::int64_t>(i),
              "trace: chunk records out of order at index " + std::to_string(i));
    }
  } else {
    require(!chunk_records.empty(), "trace: no chunk records");
  }
}

std::int64_t PhaseProfile::total_count() const {
  std::int64_t total = 0;
  for (auto c : counts_by_phase) {
    total += c;
  }
  return total;
}

}  // namespace chunkseam
