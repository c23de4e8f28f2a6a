#include "io/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"

namespace chunkseam::io {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line_number,
                             const std::string& what) {
  throw_error(ErrorCode::io,
              origin + ": line " + std::to_string(line_number) + ": " + what);
}

json parse_line(const std::string& origin, std::size_t line_number,
                const std::string& line) {
  json value = json::parse(line, nullptr, false);
  if (value.is_discarded() || !value.is_object()) {
    parse_fail(origin, line_number, "malformed record");
  }
  return value;
}

template <typename T>
T field(const json& record, const char* key, const std::string& origin,
        std::size_t line_number) {
  auto it = record.find(key);
  if (it == record.end()) {
    parse_fail(origin, line_number, std::string("missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    parse_fail(origin, line_number, std::string("bad value for field '") + key + "'");
  }
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    return "nan";
  }
  return std::string(buf, ptr);
}

std::string trace_to_string(const RolloutTrace& trace) {
  trace.validate();
  std::ostringstream out;
  json header;
  header["type"] = "header";
  header["version"] = kTraceFormatVersion;
  header["stride"] = trace.stride_k;
  header["horizon"] = trace.horizon_h;
  header["action_dim"] = trace.dim();
  header["phase_offset"] = trace.phase_offset;
  header["source"] = trace.source;
  header["episode_id"] = trace.episode_id;
  header["seed_root"] = trace.seed.root;
  header["seed_index"] = trace.seed.index;
  header["config_hash"] = trace.config_hash;
  header["has_contact"] = trace.has_contact_mask();
  out << header.dump() << "\n";

  // Chunk lookup per step: steps before the first boundary belong to the
  // first record; after that the index advances every stride.
  auto chunk_of = [&](std::int64_t t) -> const ChunkRecord* {
    std::int64_t shifted = t - trace.phase_offset;
    std::int64_t idx = shifted < 0 ? 0 : shifted / trace.stride_k;
    if (trace.phase_offset > 0 && shifted >= 0) {
      idx += 1;
    }
    auto u = static_cast<std::size_t>(idx);
    return u < trace.chunk_records.size() ? &trace.chunk_records[u] : nullptr;
  };

  for (std::int64_t t = 0; t < trace.steps(); ++t) {
    json step;
    step["type"] = "step";
    step["t"] = t;
    json action = json::array();
    for (std::int64_t d = 0; d < trace.dim(); ++d) {
      action.push_back(trace.executed(t, d));
    }
    step["action"] = std::move(action);
    const ChunkRecord* record = chunk_of(t);
    step["chunk"] = record ? record->chunk_index : -1;
    step["phase"] = trace.phase(t);
    if (trace.contact_mask) {
      step["contact"] = (*trace.contact_mask)[static_cast<std::size_t>(t)] != 0;
    } else {
      step["contact"] = nullptr;
    }
    if (record && record->steering) {
      step["alpha"] = record->steering->alpha;
      step["direction"] = record->steering->direction_id;
    } else {
      step["alpha"] = 0.0;
      step["direction"] = nullptr;
    }
    out << step.dump() << "\n";
  }

  json end;
  end["type"] = "end";
  end["outcome"] = trace.success ? "success" : "failure";
  end["steps"] = trace.steps();
  end["valid"] = trace.valid;
  json records = json::array();
  for (const auto& record : trace.chunk_records) {
    json r;
    r["chunk"] = record.chunk_index;
    r["context"] = record.context_id;
    r["noise"] = record.noise_id;
    if (record.steering) {
      r["alpha"] = record.steering->alpha;
      r["direction"] = record.steering->direction_id;
    } else {
      r["alpha"] = 0.0;
      r["direction"] = nullptr;
    }
    records.push_back(std::move(r));
  }
  end["chunk_records"] = std::move(records);
  out << end.dump() << "\n";
  return out.str();
}

RolloutTrace trace_from_string(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_number = 0;

  RolloutTrace trace;
  bool have_header = false;
  bool have_end = false;
  bool has_contact = false;
  std::int64_t action_dim = 0;
  std::int64_t declared_steps = -1;
  std::vector<std::vector<double>> rows;
  std::vector<std::uint8_t> contact;

  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    json record = parse_line(origin, line_number, line);
    auto type = field<std::string>(record, "type", origin, line_number);
    if (type == "header") {
      if (have_header) {
        parse_fail(origin, line_number, "duplicate header");
      }
      have_header = true;
      auto version = field<std::int64_t>(record, "version", origin, line_number);
      if (version != kTraceFormatVersion) {
        parse_fail(origin, line_number,
                   "unsupported format version " + std::to_string(version));
      }
      trace.stride_k = field<std::int64_t>(record, "stride", origin, line_number);
      trace.horizon_h = field<std::int64_t>(record, "horizon", origin, line_number);
      action_dim = field<std::int64_t>(record, "action_dim", origin, line_number);
      trace.phase_offset = field<std::int64_t>(record, "phase_offset", origin, line_number);
      trace.source = field<std::string>(record, "source", origin, line_number);
      trace.episode_id = field<std::string>(record, "episode_id", origin, line_number);
      trace.seed.root = field<std::uint64_t>(record, "seed_root", origin, line_number);
      trace.seed.index = field<std::uint64_t>(record, "seed_index", origin, line_number);
      trace.config_hash = field<std::string>(record, "config_hash", origin, line_number);
      has_contact = field<bool>(record, "has_contact", origin, line_number);
      if (trace.stride_k < 1 || trace.horizon_h < trace.stride_k) {
        parse_fail(origin, line_number, "header must satisfy 1 <= stride <= horizon");
      }
      if (action_dim < 1) {
        parse_fail(origin, line_number, "action_dim must be >= 1");
      }
      continue;
    }
    if (!have_header) {
      parse_fail(origin, line_number, "record before header");
    }
    if (have_end) {
      parse_fail(origin, line_number, "record after trailing record");
    }
    if (type == "step") {
      auto t = field<std::int64_t>(record, "t", origin, line_number);
      if (t != static_cast<std::int64_t>(rows.size())) {
        parse_fail(origin, line_number,
                   "timestep " + std::to_string(t) + " out of order (expected " +
                       std::to_string(rows.size()) + ")");
      }
      auto action = field<std::vector<double>>(record, "action", origin, line_number);
      if (static_cast<std::int64_t>(action.size()) != action_dim) {
        parse_fail(origin, line_number, "action length != action_dim");
      }
      for (double a : action) {
        if (!std::isfinite(a)) {
          parse_fail(origin, line_number, "non-finite action value");
        }
      }
      rows.push_back(std::move(action));
      auto it = record.find("contact");
      if (has_contact) {
        if (it == record.end() || !it->is_boolean()) {
          parse_fail(origin, line_number,
                     "header declares contact data but step has no boolean 'contact'");
        }
        contact.push_back(it->get<bool>() ? 1 : 0);
      }
      continue;
    }
    if (type == "end") {
      have_end = true;
      auto outcome = field<std::string>(record, "outcome", origin, line_number);
      if (outcome != "success" && outcome != "failure") {
        parse_fail(origin, line_number, "outcome must be success|failure");
      }
      trace.success = outcome == "success";
      trace.valid = field<bool>(record, "valid", origin, line_number);
      declared_steps = field<std::int64_t>(record, "steps", origin, line_number);
      auto it = record.find("chunk_records");
      if (it == record.end() || !it->is_array()) {
        parse_fail(origin, line_number, "missing chunk_records array");
      }
      for (const auto& r : *it) {
        ChunkRecord chunk_record;
        chunk_record.chunk_index = field<std::int64_t>(r, "chunk", origin, line_number);
        chunk_record.context_id = field<std::string>(r, "context", origin, line_number);
        chunk_record.noise_id = field<std::string>(r, "noise", origin, line_number);
        auto dir = r.find("direction");
        if (dir != r.end() && dir->is_string()) {
          SteeringTag tag;
          tag.direction_id = dir->get<std::string>();
          tag.alpha = field<double>(r, "alpha", origin, line_number);
          chunk_record.steering = std::move(tag);
        }
        trace.chunk_records.push_back(std::move(chunk_record));
      }
      continue;
    }
    parse_fail(origin, line_number, "unknown record type '" + type + "'");
  }

  if (!have_header) {
    parse_fail(origin, line_number, "empty or headerless file");
  }
  if (!have_end) {
    parse_fail(origin, line_number + 1, "truncated file: no trailing record");
  }
  if (declared_steps != static_cast<std::int64_t>(rows.size())) {
    parse_fail(origin, line_number,
               "trailing record declares " + std::to_string(declared_steps) +
                   " steps but " + std::to_string(rows.size()) + " were read");
  }
  trace.executed.resize(static_cast<std::int64_t>(rows.size()), action_dim);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::int64_t d = 0; d < action_dim; ++d) {
      trace.executed(static_cast<std::int64_t>(t), d) = rows[t][static_cast<std::size_t>(d)];
    }
  }
  if (has_contact) {
    trace.contact_mask = std::move(contact);
  }
  try {
    trace.validate();
  } catch (const Error& e) {
    throw_error(ErrorCode::io, origin + ": " + e.what());
  }
  return trace;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw_error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  }
  out << content;
  if (!out) {
    throw_error(ErrorCode::io, "write failed for '" + path.string() + "'");
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw_error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_trace(const RolloutTrace& trace, const std::filesystem::path& path) {
  write_text_file(path, trace_to_string(trace));
}

RolloutTrace read_trace(const std::filesystem::path& path) {
  return trace_from_string(read_text_file(path), path.string());
}

}  // namespace chunkseam::io
