#include "kfm/grammar.hpp"

#include <algorithm>

namespace kfm {

namespace {

bool contains(const std::vector<std::string>& xs, const std::string& v) {
  return std::find(xs.begin(), xs.end(), v) != xs.end();
}

}  // namespace

std::string to_string(Task t) {
  switch (t) {
    case Task::search: return "search";
    case Task::counting: return "counting";
    case Task::dust: return "dust";
  }
  throw UnknownTask("bad task enum");
}

Task task_from_string(const std::string& s) {
  if (s == "search") return Task::search;
  if (s == "counting") return Task::counting;
  if (s == "dust") return Task::dust;
  throw UnknownTask("unknown task '" + s + "'");
}

const std::vector<std::string>& bin_names() {
  static const std::vector<std::string> v{"left", "center", "right"};
  return v;
}

const std::vector<std::string>& search_objects() {
  static const std::vector<std::string> v{
      "green tape",   "red block",  "corn",     "baguette",     "blue block",
      "fried chicken", "milk carton", "ketchup", "eraser",       "grapes",
      "strawberry",   "tomato",     "pear",     "wooden block", "olive oil"};
  return v;
}

const std::vector<std::string>& ingredients() {
  static const std::vector<std::string> v{"peanuts", "jelly beans"};
  return v;
}

const std::vector<std::string>& bowl_colors() {
  static const std::vector<std::string> v{"green", "blue"};
  return v;
}

const std::vector<std::string>& shelf_objects() {
  static const std::vector<std::string> v{
      "panda plushie",    "purple plushie",     "zebra plushie",
      "elephant plushie", "lion plushie",       "smily face ball",
      "hello kitty plushie", "baby shoe",       "milk carton"};
  return v;
}

const std::vector<std::string>& shelf_names() {
  static const std::vector<std::string> v{"bottom", "top"};
  return v;
}

std::string Subtask::label() const {
  switch (kind) {
    case SubtaskKind::look_bin:
      return "look inside the " + location + " bin";
    case SubtaskKind::take_object:
      return "take the " + object + " from the " + location +
             " bin and place it in the white bin";
    case SubtaskKind::pick_scooper: return "pick up the scooper";
    case SubtaskKind::place_scoop:
      return "place a scoop of " + object + " in the " + location + " bowl";
    case SubtaskKind::reset_scooper: return "reset scooper position";
    case SubtaskKind::drop_scooper: return "drop the scooper";
    case SubtaskKind::remove_bottom: return "remove the object on the bottom shelf";
    case SubtaskKind::remove_top: return "remove the object on the top shelf";
    case SubtaskKind::pick_duster: return "pick up duster";
    case SubtaskKind::dust_bottom: return "dust bottom shelf";
    case SubtaskKind::reset_duster: return "reset duster";
    case SubtaskKind::dust_top: return "dust top shelf";
    case SubtaskKind::put_down_duster: return "put down duster";
    case SubtaskKind::place_bottom:
      return "place the " + object + " on the bottom shelf";
    case SubtaskKind::place_top:
      return "place the " + object + " on the top shelf";
  }
  throw UnknownSubtask("bad subtask kind");
}

namespace {

bool strip_affixes(const std::string& label, const std::string& prefix,
                   const std::string& suffix, std::string& middle) {
  if (label.size() < prefix.size() + suffix.size()) return false;
  if (label.compare(0, prefix.size(), prefix) != 0) return false;
  if (label.compare(label.size() - suffix.size(), suffix.size(), suffix) != 0) {
    return false;
  }
  middle = label.substr(prefix.size(), label.size() - prefix.size() - suffix.size());
  return true;
}

std::optional<Subtask> try_parse(Task task, const std::string& label) {
  std::string a, rest;
  switch (task) {
    case Task::search: {
      if (strip_affixes(label, "look inside the ", " bin", a) &&
          contains(bin_names(), a)) {
        return look_bin(a);
      }
      if (strip_affixes(label, "take the ",
                        " bin and place it in the white bin", rest)) {
        auto sep = rest.rfind(" from the ");
        if (sep != std::string::npos) {
          std::string obj = rest.substr(0, sep);
          std::string bin = rest.substr(sep + 10);
          if (contains(search_objects(), obj) && contains(bin_names(), bin)) {
            return take_object(obj, bin);
          }
        }
      }
      return std::nullopt;
    }
    case Task::counting: {
      if (label == "pick up the scooper") return pick_scooper();
      if (label == "reset scooper position") return reset_scooper();
      if (label == "drop the scooper") return drop_scooper();
      if (strip_affixes(label, "place a scoop of ", " bowl", rest)) {
        auto sep = rest.rfind(" in the ");
        if (sep != std::string::npos) {
          std::string ing = rest.substr(0, sep);
          std::string color = rest.substr(sep + 8);
          if (contains(ingredients(), ing) && contains(bowl_colors(), color)) {
            return place_scoop(ing, color);
          }
        }
      }
      return std::nullopt;
    }
    case Task::dust: {
      if (label == "remove the object on the bottom shelf") return remove_shelf("bottom");
      if (label == "remove the object on the top shelf") return remove_shelf("top");
      if (label == "pick up duster") return pick_duster();
      if (label == "dust bottom shelf") return dust_shelf("bottom");
      if (label == "reset duster") return reset_duster();
      if (label == "dust top shelf") return dust_shelf("top");
      if (label == "put down duster") return put_down_duster();
      if (strip_affixes(label, "place the ", " on the bottom shelf", a) &&
          contains(shelf_objects(), a)) {
        return place_shelf(a, "bottom");
      }
      if (strip_affixes(label, "place the ", " on the top shelf", a) &&
          contains(shelf_objects(), a)) {
        return place_shelf(a, "top");
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

Subtask parse_subtask(Task task, const std::string& label) {
  auto s = try_parse(task, label);
  if (!s) {
    throw UnknownSubtask("label '" + label + "' not in the " + to_string(task) +
                         " grammar");
  }
  return *s;
}

Subtask look_bin(const std::string& bin) {
  return Subtask{Task::search, SubtaskKind::look_bin, "", bin};
}
Subtask take_object(const std::string& object, const std::string& bin) {
  return Subtask{Task::search, SubtaskKind::take_object, object, bin};
}
Subtask pick_scooper() {
  return Subtask{Task::counting, SubtaskKind::pick_scooper, "", ""};
}
Subtask place_scoop(const std::string& ingredient, const std::string& color) {
  return Subtask{Task::counting, SubtaskKind::place_scoop, ingredient, color};
}
Subtask reset_scooper() {
  return Subtask{Task::counting, SubtaskKind::reset_scooper, "", ""};
}
Subtask drop_scooper() {
  return Subtask{Task::counting, SubtaskKind::drop_scooper, "", ""};
}
Subtask remove_shelf(const std::string& shelf) {
  return Subtask{Task::dust,
                 shelf == "top" ? SubtaskKind::remove_top : SubtaskKind::remove_bottom,
                 "", shelf};
}
Subtask pick_duster() {
  return Subtask{Task::dust, SubtaskKind::pick_duster, "", ""};
}
Subtask dust_shelf(const std::string& shelf) {
  return Subtask{Task::dust,
                 shelf == "top" ? SubtaskKind::dust_top : SubtaskKind::dust_bottom,
                 "", shelf};
}
Subtask reset_duster() {
  return Subtask{Task::dust, SubtaskKind::reset_duster, "", ""};
}
Subtask put_down_duster() {
  return Subtask{Task::dust, SubtaskKind::put_down_duster, "", ""};
}
Subtask place_shelf(const std::string& object, const std::string& shelf) {
  return Subtask{Task::dust,
                 shelf == "top" ? SubtaskKind::place_top : SubtaskKind::place_bottom,
                 object, shelf};
}

const std::vector<SubtaskTemplate>& grammar(Task task) {
  static const std::vector<SubtaskTemplate> search{
      {SubtaskKind::look_bin, "look inside the <LOCATION> bin"},
      {SubtaskKind::take_object,
       "take the <OBJECT> from the <LOCATION> bin and place it in the white bin"},
  };
  static const std::vector<SubtaskTemplate> counting{
      {SubtaskKind::pick_scooper, "pick up the scooper"},
      {SubtaskKind::place_scoop, "place a scoop of <OBJECT> in the <COLOR> bowl"},
      {SubtaskKind::reset_scooper, "reset scooper position"},
      {SubtaskKind::drop_scooper, "drop the scooper"},
  };
  static const std::vector<SubtaskTemplate> dust{
      {SubtaskKind::remove_bottom, "remove the object on the bottom shelf"},
      {SubtaskKind::remove_top, "remove the object on the top shelf"},
      {SubtaskKind::pick_duster, "pick up duster"},
      {SubtaskKind::dust_bottom, "dust bottom shelf"},
      {SubtaskKind::reset_duster, "reset duster"},
      {SubtaskKind::dust_top, "dust top shelf"},
      {SubtaskKind::put_down_duster, "put down duster"},
      {SubtaskKind::place_bottom, "place the <OBJECT> on the bottom shelf"},
      {SubtaskKind::place_top, "place the <OBJECT> on the top shelf"},
  };
  switch (task) {
    case Task::search: return search;
    case Task::counting: return counting;
    case Task::dust: return dust;
  }
  throw UnknownTask("bad task enum");
}

bool matches_pattern(const std::string& pattern, Task task, const std::string& label) {
  auto s = try_parse(task, label);
  if (!s) return false;
  for (const auto& t : grammar(task)) {
    if (t.pattern == pattern) return t.kind == s->kind;
  }
  return false;
}

std::string number_word(int n) {
  static const char* words[] = {"zero", "one", "two",   "three", "four",
                                "five", "six", "seven", "eight", "nine"};
  if (n < 0 || n > 9) return std::to_string(n);
  return words[n];
}

}  // namespace kfm
