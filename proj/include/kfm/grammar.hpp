#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kfm/errors.hpp"

// Subtask label grammar for the three tasks. Labels are the exact strings
// committed by the high-level policy, executed by the low-level policy, and
// matched by the keyframe annotation rules, so parsing and formatting live in
// one place.

namespace kfm {

enum class Task { search, counting, dust };

std::string to_string(Task t);
Task task_from_string(const std::string& s);  // throws UnknownTask

/// Bin names for the search task, in exploration-prior order.
const std::vector<std::string>& bin_names();
/// Objects that can appear in the search bins.
const std::vector<std::string>& search_objects();
/// Scoopable ingredients.
const std::vector<std::string>& ingredients();
/// Bowl colors.
const std::vector<std::string>& bowl_colors();
/// Objects that sit on the shelves.
const std::vector<std::string>& shelf_objects();
/// {"bottom", "top"}.
const std::vector<std::string>& shelf_names();

enum class SubtaskKind {
  look_bin,        // look inside the <LOCATION> bin
  take_object,     // take the <OBJECT> from the <LOCATION> bin and place it in the white bin
  pick_scooper,    // pick up the scooper
  place_scoop,     // place a scoop of <OBJECT> in the <COLOR> bowl
  reset_scooper,   // reset scooper position
  drop_scooper,    // drop the scooper
  remove_bottom,   // remove the object on the bottom shelf
  remove_top,      // remove the object on the top shelf
  pick_duster,     // pick up duster
  dust_bottom,     // dust bottom shelf
  reset_duster,    // reset duster
  dust_top,        // dust top shelf
  put_down_duster, // put down duster
  place_bottom,    // place the <OBJECT> on the bottom shelf
  place_top,       // place the <OBJECT> on the top shelf
};

struct Subtask {
  Task task = Task::search;
  SubtaskKind kind = SubtaskKind::look_bin;
  std::string object;    // <OBJECT> slot, when the template has one
  std::string location;  // <LOCATION>/<COLOR> slot, when the template has one

  std::string label() const;
  bool operator==(const Subtask& o) const = default;
};

/// Parses a label against the task grammar. Throws UnknownSubtask when the
/// label matches no template or fills a slot with an out-of-vocabulary value.
Subtask parse_subtask(Task task, const std::string& label);

/// Convenience formatters.
Subtask look_bin(const std::string& bin);
Subtask take_object(const std::string& object, const std::string& bin);
Subtask pick_scooper();
Subtask place_scoop(const std::string& ingredient, const std::string& color);
Subtask reset_scooper();
Subtask drop_scooper();
Subtask remove_shelf(const std::string& shelf);
Subtask pick_duster();
Subtask dust_shelf(const std::string& shelf);
Subtask reset_duster();
Subtask put_down_duster();
Subtask place_shelf(const std::string& object, const std::string& shelf);

/// One grammar template, e.g. "look inside the <LOCATION> bin".
struct SubtaskTemplate {
  SubtaskKind kind;
  std::string pattern;
};

/// Every template of a task's grammar, in canonical execution order.
const std::vector<SubtaskTemplate>& grammar(Task task);

/// True when the label instantiates the given pattern.
bool matches_pattern(const std::string& pattern, Task task, const std::string& label);

/// English number word for the scoop counts used in instructions.
std::string number_word(int n);

}  // namespace kfm
