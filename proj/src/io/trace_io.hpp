#pragma once

#include <filesystem>
#include <string>

#include "core/types.hpp"

namespace chunkseam::io {

inline constexpr int kTraceFormatVersion = 1;

// Line-delimited trace format: one header object, one record per executed
// timestep, and a trailing record that carries the outcome and the chunk
// bookkeeping. Text (JSON per line) on purpose: traces are small at desk
// scale and human inspection matters. Serialization is canonical — equal
// traces produce identical bytes, and read(write(x)) == x exactly.
std::string trace_to_string(const RolloutTrace& trace);
RolloutTrace trace_from_string(const std::string& text, const std::string& origin);

void write_trace(const RolloutTrace& trace, const std::filesystem::path& path);
RolloutTrace read_trace(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

// Shortest round-trip decimal rendering ("nan" for NaN); shared by the CSV
// writers so that re-read values are bit-identical.
std::string format_double(double value);

}  // namespace chunkseam::io
