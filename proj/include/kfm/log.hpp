// Append-only episode log: timestamped records serialized as JSON lines.
// Every effect of a run (frames, decisions, chunks, transitions, endings)
// lands here, which is what makes byte-level determinism checkable and
// replay possible.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfm/errors.hpp"

namespace kfm {

namespace recordkind {
inline constexpr const char* episode_header = "episode_header";
inline constexpr const char* observation = "observation";
inline constexpr const char* hl_decision = "hl_decision";
inline constexpr const char* subtask_committed = "subtask_committed";
inline constexpr const char* cap_eviction = "cap_eviction";
inline constexpr const char* ll_chunk = "ll_chunk";
inline constexpr const char* env_transition = "env_transition";
inline constexpr const char* timeout_at_max_ticks = "timeout_at_max_ticks";
inline constexpr const char* episode_end = "episode_end";
}  // namespace recordkind

struct Record {
  std::int64_t t_ms = 0;
  std::string kind;
  nlohmann::json payload;
};

nlohmann::json to_json(const Record& r);
Record record_from_json(const nlohmann::json& j);

/// One record per line, keys sorted, no trailing blank line beyond the
/// final newline. Byte-stable for identical inputs.
std::string serialize_records(const std::vector<Record>& records);

/// Inverse of serialize_records. Blank lines are rejected, as is anything
/// that does not parse; throws CorruptFile with the offending line number.
std::vector<Record> parse_records(std::istream& in);

void write_records(const std::string& path, const std::vector<Record>& records);
std::vector<Record> read_records(const std::string& path);

}  // namespace kfm
