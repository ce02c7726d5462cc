#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfm/grammar.hpp"
#include "kfm/memory.hpp"

// Symbolic observations. Each timestep yields one logical frame carrying the
// composite of both camera payloads; everything a policy may condition on is
// in here, and nothing else is ever handed to a policy. Hidden task state
// (unseen bin contents, scoop tallies, dust flags, original shelf layout)
// never appears in a frame except through the transient event payloads below,
// which model what a camera would actually capture at that instant.

namespace kfm {

/// Search-task view.
struct SearchScene {
  std::string instruction;                       ///< active retrieval request
  std::optional<std::string> inspecting;         ///< bin currently looked into
  std::vector<std::string> inspected_contents;   ///< visible iff inspecting
  std::optional<std::string> holding;
  std::vector<std::string> white_bin;            ///< always visible, sorted

  bool operator==(const SearchScene&) const = default;
};

/// Counting-task view.
struct CountingScene {
  std::string instruction;
  bool scooper_held = false;
  bool arm_ready = false;                         ///< scooper at neutral pose
  /// Present only on the single frame that captures a completed pour.
  std::optional<std::pair<std::string, std::string>> pour;  ///< (ingredient, bowl)

  bool operator==(const CountingScene&) const = default;
};

/// Dust-task view.
struct DustScene {
  std::string instruction;
  std::optional<std::string> shelf_bottom;        ///< object on the bottom shelf
  std::optional<std::string> shelf_top;
  std::vector<std::string> table;                 ///< removed objects, sorted
  std::string duster = "station";                 ///< "held" or "station"
  std::optional<std::string> stroke;              ///< shelf being wiped right now
  std::optional<std::pair<std::string, std::string>> removal;    ///< (shelf, object)
  std::optional<std::pair<std::string, std::string>> placement;  ///< (shelf, object)

  bool operator==(const DustScene&) const = default;
};

struct Observation {
  FrameIndex index = 0;
  Task task = Task::search;
  SearchScene search;
  CountingScene counting;
  DustScene dust;

  const std::string& instruction() const;
  bool operator==(const Observation&) const = default;
};

nlohmann::json to_json(const Observation& o);
Observation observation_from_json(const nlohmann::json& j);

/// Stable 64-bit digest of arbitrary bytes (FNV-1a).
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Content-addressed frame id: digest of the canonical frame serialization.
std::string frame_ref(const Observation& o);

}  // namespace kfm
