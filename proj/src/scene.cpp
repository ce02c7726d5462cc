#include "kfm/scene.hpp"

namespace kfm {

using nlohmann::json;

namespace {

json opt_str(const std::optional<std::string>& v) {
  if (v) return *v;
  return nullptr;
}

std::optional<std::string> str_opt(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

json opt_pair(const std::optional<std::pair<std::string, std::string>>& v) {
  if (!v) return nullptr;
  return json{v->first, v->second};
}

std::optional<std::pair<std::string, std::string>> pair_opt(const json& j) {
  if (j.is_null()) return std::nullopt;
  return std::make_pair(j.at(0).get<std::string>(), j.at(1).get<std::string>());
}

}  // namespace

const std::string& Observation::instruction() const {
  switch (task) {
    case Task::search: return search.instruction;
    case Task::counting: return counting.instruction;
    case Task::dust: return dust.instruction;
  }
  throw UnknownTask("bad task enum");
}

json to_json(const Observation& o) {
  json j;
  j["index"] = o.index;
  j["cameras"] = json::array({"global", "wrist"});
  j["task"] = to_string(o.task);
  switch (o.task) {
    case Task::search: {
      const auto& s = o.search;
      j["scene"] = json{{"instruction", s.instruction},
                        {"inspecting", opt_str(s.inspecting)},
                        {"inspected_contents", s.inspected_contents},
                        {"holding", opt_str(s.holding)},
                        {"white_bin", s.white_bin}};
      break;
    }
    case Task::counting: {
      const auto& s = o.counting;
      j["scene"] = json{{"instruction", s.instruction},
                        {"scooper_held", s.scooper_held},
                        {"arm_ready", s.arm_ready},
                        {"pour", opt_pair(s.pour)}};
      break;
    }
    case Task::dust: {
      const auto& s = o.dust;
      j["scene"] = json{{"instruction", s.instruction},
                        {"shelf_bottom", opt_str(s.shelf_bottom)},
                        {"shelf_top", opt_str(s.shelf_top)},
                        {"table", s.table},
                        {"duster", s.duster},
                        {"stroke", opt_str(s.stroke)},
                        {"removal", opt_pair(s.removal)},
                        {"placement", opt_pair(s.placement)}};
      break;
    }
  }
  return j;
}

Observation observation_from_json(const json& j) {
  Observation o;
  o.index = j.at("index").get<FrameIndex>();
  o.task = task_from_string(j.at("task").get<std::string>());
  const json& s = j.at("scene");
  switch (o.task) {
    case Task::search:
      o.search.instruction = s.at("instruction").get<std::string>();
      o.search.inspecting = str_opt(s.at("inspecting"));
      o.search.inspected_contents =
          s.at("inspected_contents").get<std::vector<std::string>>();
      o.search.holding = str_opt(s.at("holding"));
      o.search.white_bin = s.at("white_bin").get<std::vector<std::string>>();
      break;
    case Task::counting:
      o.counting.instruction = s.at("instruction").get<std::string>();
      o.counting.scooper_held = s.at("scooper_held").get<bool>();
      o.counting.arm_ready = s.at("arm_ready").get<bool>();
      o.counting.pour = pair_opt(s.at("pour"));
      break;
    case Task::dust:
      o.dust.instruction = s.at("instruction").get<std::string>();
      o.dust.shelf_bottom = str_opt(s.at("shelf_bottom"));
      o.dust.shelf_top = str_opt(s.at("shelf_top"));
      o.dust.table = s.at("table").get<std::vector<std::string>>();
      o.dust.duster = s.at("duster").get<std::string>();
      o.dust.stroke = str_opt(s.at("stroke"));
      o.dust.removal = pair_opt(s.at("removal"));
      o.dust.placement = pair_opt(s.at("placement"));
      break;
  }
  return o;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

std::string frame_ref(const Observation& o) {
  return hex64(fnv1a64(to_json(o).dump()));
}

}  // namespace kfm
