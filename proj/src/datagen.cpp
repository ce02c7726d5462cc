#include "kfm/datagen.hpp"

#include <algorithm>
#include <map>
#include <regex>

#include "kfm/policies.hpp"

namespace kfm {

using nlohmann::json;

Demonstration demo_from_records(const std::vector<Record>& records) {
  if (records.empty() || records.front().kind != recordkind::episode_header) {
    throw CorruptFile("log does not start with an episode header");
  }
  Demonstration demo;
  const auto& header = records.front().payload;
  demo.task = task_from_string(header.at("task").get<std::string>());
  demo.seed = header.at("seed").get<std::uint64_t>();
  demo.header = header;

  std::vector<std::pair<std::int64_t, std::string>> commits;
  std::vector<std::int64_t> frame_stamps;
  for (const auto& r : records) {
    if (r.kind == recordkind::observation) {
      demo.frames.push_back(
          observation_from_json(r.payload.at("frame")));
      frame_stamps.push_back(r.t_ms);
    } else if (r.kind == recordkind::subtask_committed) {
      commits.emplace_back(r.t_ms, r.payload.at("subtask").get<std::string>());
    } else if (r.kind == recordkind::hl_decision) {
      demo.decisions.push_back({r.payload.at("tick").get<std::int64_t>(),
                                r.payload.at("subtask").get<std::string>()});
    } else if (r.kind == recordkind::episode_end) {
      demo.completed = r.payload.at("completed").get<bool>();
      demo.score = task_score_from_json(r.payload.at("score"));
    }
  }
  // a frame carries whatever label was in force when it was sampled; the
  // first commit shares stamp zero with the first frame
  for (std::size_t i = 0; i < demo.frames.size(); ++i) {
    std::string current;
    for (const auto& [t, label] : commits) {
      if (t > frame_stamps[i]) break;
      current = label;
    }
    demo.labels.push_back(current);
  }
  return demo;
}

Demonstration generate_demo(Task task, std::uint64_t seed,
                            const RunConfig& cfg) {
  auto env = make_env(task, seed);
  EvidenceHl hl(MemoryView::full);
  ScriptedLl ll(cfg.chunk_len, cfg.open_loop_exec);
  auto result = run_episode(*env, hl, ll, cfg);
  return demo_from_records(result.records);
}

std::vector<SubtaskSegment> segments(const Demonstration& demo) {
  std::vector<SubtaskSegment> out;
  for (FrameIndex i = 0; i < static_cast<FrameIndex>(demo.labels.size()); ++i) {
    const auto& label = demo.labels[static_cast<std::size_t>(i)];
    if (out.empty() || out.back().label != label) {
      out.push_back({label, i, i});
    } else {
      out.back().end = i;
    }
  }
  return out;
}

std::string to_string(Selector s) {
  switch (s) {
    case Selector::first: return "first";
    case Selector::last: return "last";
    case Selector::none: return "none";
  }
  throw ConfigError("unhandled selector");
}

Selector selector_from_string(const std::string& s) {
  if (s == "first") return Selector::first;
  if (s == "last") return Selector::last;
  if (s == "none") return Selector::none;
  throw ConfigError("unknown selector '" + s + "'");
}

const std::vector<AnnotationRule>& default_rules(Task task) {
  static const auto build = [](Task t) {
    // the mark a subtask leaves on the world shows up in its final frame, so
    // world-changing subtasks keep their last frame and pure arm motions
    // (pickups, resets, drops) keep nothing
    std::map<SubtaskKind, Selector> sel;
    switch (t) {
      case Task::search:
        sel = {{SubtaskKind::look_bin, Selector::last},
               {SubtaskKind::take_object, Selector::none}};
        break;
      case Task::counting:
        sel = {{SubtaskKind::pick_scooper, Selector::none},
               {SubtaskKind::place_scoop, Selector::last},
               {SubtaskKind::reset_scooper, Selector::none},
               {SubtaskKind::drop_scooper, Selector::none}};
        break;
      case Task::dust:
        sel = {{SubtaskKind::remove_bottom, Selector::last},
               {SubtaskKind::remove_top, Selector::last},
               {SubtaskKind::pick_duster, Selector::none},
               {SubtaskKind::dust_bottom, Selector::last},
               {SubtaskKind::reset_duster, Selector::none},
               {SubtaskKind::dust_top, Selector::last},
               {SubtaskKind::put_down_duster, Selector::none},
               {SubtaskKind::place_bottom, Selector::last},
               {SubtaskKind::place_top, Selector::last}};
        break;
    }
    std::vector<AnnotationRule> rules;
    for (const auto& tmpl : grammar(t)) {
      rules.push_back({tmpl.pattern, sel.at(tmpl.kind)});
    }
    return rules;
  };
  static const std::vector<AnnotationRule> search_rules = build(Task::search);
  static const std::vector<AnnotationRule> counting_rules = build(Task::counting);
  static const std::vector<AnnotationRule> dust_rules = build(Task::dust);
  switch (task) {
    case Task::search: return search_rules;
    case Task::counting: return counting_rules;
    case Task::dust: return dust_rules;
  }
  throw UnknownTask("unhandled task");
}

std::vector<FrameIndex> annotate(const Demonstration& demo,
                                 const std::vector<AnnotationRule>& rules) {
  std::vector<FrameIndex> out;
  for (const auto& seg : segments(demo)) {
    const AnnotationRule* hit = nullptr;
    for (const auto& rule : rules) {
      if (matches_pattern(rule.subtask_pattern, demo.task, seg.label)) {
        hit = &rule;
        break;
      }
    }
    if (hit == nullptr) {
      throw UncoveredLabel("no annotation rule covers '" + seg.label + "'");
    }
    switch (hit->selector) {
      case Selector::first: out.push_back(seg.start); break;
      case Selector::last: out.push_back(seg.end); break;
      case Selector::none: break;
    }
  }
  return out;
}

const std::string& system_prompt_text() {
  static const std::string text =
      "You are a robot program that predicts actions. The video input from "
      "the egocentric camera shows the most recent actions the robot has "
      "executed. The images are selected frames of particular importance "
      "from all the actions the robot has executed so far. Based on these, "
      "output the current subtask the robot should execute and nothing "
      "else.\n\nReturn a JSON with:\n- current_subtask: the action that "
      "should be executed at the current timestep\n- keyframe_positions: "
      "list of frame positions (1-indexed) from the video input where "
      "actions change\n";
  return text;
}

std::string user_prompt_text(Task task, const std::string& instruction) {
  std::string text = "Task: ";
  if (task == Task::search) {
    text += "The robot's wrist and third-person camera feed is shown below. ";
  }
  text += "What subtask should the robot execute to " + instruction +
          "?\nHere are the selected frames from the entirety of the full "
          "video that are of particular importance:";
  return text;
}

std::vector<PromptRecord> export_prompts(const Demonstration& demo,
                                         const std::vector<FrameIndex>& gt_keyframes,
                                         int window) {
  if (window <= 0) throw ConfigError("window must be positive");
  std::vector<PromptRecord> out;
  for (const auto& dp : demo.decisions) {
    auto t = dp.tick;
    auto len = std::min<std::int64_t>(t + 1, window);
    PromptRecord rec;
    rec.system_text = system_prompt_text();
    rec.user_text = user_prompt_text(
        demo.task, demo.frames[static_cast<std::size_t>(t)].instruction());
    std::vector<int> positions;
    for (auto k : gt_keyframes) {
      if (k < t - window + 1) {
        rec.keyframe_refs.push_back(
            frame_ref(demo.frames[static_cast<std::size_t>(k)]));
      } else if (k <= t) {
        positions.push_back(static_cast<int>(k - (t - len)));
      }
    }
    for (auto i = t - len + 1; i <= t; ++i) {
      rec.video_refs.push_back(
          frame_ref(demo.frames[static_cast<std::size_t>(i)]));
    }
    rec.assistant_json = json{{"current_subtask", dp.subtask},
                              {"keyframe_positions", positions}};
    out.push_back(std::move(rec));
  }
  return out;
}

json to_json(const PromptRecord& r) {
  return json{{"system_text", r.system_text},
              {"user_text", r.user_text},
              {"keyframe_refs", r.keyframe_refs},
              {"video_refs", r.video_refs},
              {"assistant_json", r.assistant_json}};
}

PromptRecord prompt_record_from_json(const json& j) {
  PromptRecord r;
  try {
    r.system_text = j.at("system_text").get<std::string>();
    r.user_text = j.at("user_text").get<std::string>();
    r.keyframe_refs = j.at("keyframe_refs").get<std::vector<std::string>>();
    r.video_refs = j.at("video_refs").get<std::vector<std::string>>();
    r.assistant_json = j.at("assistant_json");
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("bad prompt record: ") + e.what());
  }
  return r;
}

std::string serialize_prompts(const std::vector<PromptRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

namespace {

std::string json_type_name(const json& v) {
  if (v.is_object()) return "object";
  if (v.is_array()) return "array";
  if (v.is_string()) return "string";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  return "null";
}

void check_schema(const json& value, const json& schema, const std::string& path) {
  if (schema.contains("type")) {
    auto want = schema.at("type").get<std::string>();
    auto got = json_type_name(value);
    if (want != got && !(want == "number" && got == "integer")) {
      throw SchemaMismatch(path + ": expected " + want + ", got " + got);
    }
  }
  if (value.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema.at("required")) {
        if (!value.contains(key.get<std::string>())) {
          throw SchemaMismatch(path + ": missing required key '" +
                               key.get<std::string>() + "'");
        }
      }
    }
    const json* props = schema.contains("properties") ? &schema.at("properties")
                                                      : nullptr;
    for (const auto& [key, sub] : value.items()) {
      if (props != nullptr && props->contains(key)) {
        check_schema(sub, props->at(key), path + "/" + key);
      } else if (schema.contains("additionalProperties") &&
                 schema.at("additionalProperties") == false) {
        throw SchemaMismatch(path + ": unexpected key '" + key + "'");
      }
    }
  }
  if (value.is_array()) {
    if (schema.contains("minItems") &&
        value.size() < schema.at("minItems").get<std::size_t>()) {
      throw SchemaMismatch(path + ": fewer than " +
                           schema.at("minItems").dump() + " items");
    }
    if (schema.contains("maxItems") &&
        value.size() > schema.at("maxItems").get<std::size_t>()) {
      throw SchemaMismatch(path + ": more than " + schema.at("maxItems").dump() +
                           " items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        check_schema(value[i], schema.at("items"),
                     path + "/" + std::to_string(i));
      }
    }
  }
  if (value.is_string()) {
    if (schema.contains("minLength") &&
        value.get<std::string>().size() < schema.at("minLength").get<std::size_t>()) {
      throw SchemaMismatch(path + ": string shorter than minLength");
    }
    if (schema.contains("pattern")) {
      std::regex re(schema.at("pattern").get<std::string>());
      if (!std::regex_search(value.get<std::string>(), re)) {
        throw SchemaMismatch(path + ": string does not match pattern " +
                             schema.at("pattern").get<std::string>());
      }
    }
  }
  if (value.is_number_integer()) {
    if (schema.contains("minimum") &&
        value.get<std::int64_t>() < schema.at("minimum").get<std::int64_t>()) {
      throw SchemaMismatch(path + ": below minimum");
    }
    if (schema.contains("maximum") &&
        value.get<std::int64_t>() > schema.at("maximum").get<std::int64_t>()) {
      throw SchemaMismatch(path + ": above maximum");
    }
  }
}

}  // namespace

void validate_against_schema(const json& record, const json& schema) {
  check_schema(record, schema, "#");
}

}  // namespace kfm
