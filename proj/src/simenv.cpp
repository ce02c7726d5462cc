#include "kfm/simenv.hpp"

#include <algorithm>
#include <random>

namespace kfm {

using nlohmann::json;

std::string to_string(ActionKind k) {
  switch (k) {
    case ActionKind::move_to: return "move_to";
    case ActionKind::look: return "look";
    case ActionKind::grasp: return "grasp";
    case ActionKind::pour: return "pour";
    case ActionKind::dust: return "dust";
    case ActionKind::place: return "place";
    case ActionKind::park: return "park";
    case ActionKind::hold: return "hold";
    case ActionKind::retry: return "retry";
  }
  throw ConfigError("bad action kind");
}

ActionKind action_kind_from_string(const std::string& s) {
  if (s == "move_to") return ActionKind::move_to;
  if (s == "look") return ActionKind::look;
  if (s == "grasp") return ActionKind::grasp;
  if (s == "pour") return ActionKind::pour;
  if (s == "dust") return ActionKind::dust;
  if (s == "place") return ActionKind::place;
  if (s == "park") return ActionKind::park;
  if (s == "hold") return ActionKind::hold;
  if (s == "retry") return ActionKind::retry;
  throw ConfigError("bad action kind '" + s + "'");
}

json to_json(const Action& a) {
  return json{{"kind", to_string(a.kind)}, {"target", a.target}, {"object", a.object}};
}

Action action_from_json(const json& j) {
  Action a;
  a.kind = action_kind_from_string(j.at("kind").get<std::string>());
  a.target = j.at("target").get<std::string>();
  a.object = j.at("object").get<std::string>();
  return a;
}

bool TaskScore::perfect() const {
  switch (task) {
    case Task::search: return retrieved == 3 && optimal == 3;
    case Task::counting: return wrong_scoops == 0;
    case Task::dust:
      return dusted_bottom && dusted_top && replaced_bottom && replaced_top;
  }
  return false;
}

int TaskScore::points() const {
  switch (task) {
    case Task::search: return retrieved + optimal;
    case Task::counting: return 0;
    case Task::dust:
      return static_cast<int>(dusted_bottom) + static_cast<int>(dusted_top) +
             static_cast<int>(replaced_bottom) + static_cast<int>(replaced_top);
  }
  return 0;
}

int TaskScore::max_points() const {
  switch (task) {
    case Task::search: return 6;
    case Task::counting: return 0;
    case Task::dust: return 4;
  }
  return 0;
}

json to_json(const TaskScore& s) {
  json j{{"task", to_string(s.task)}};
  switch (s.task) {
    case Task::search:
      j["retrieved"] = s.retrieved;
      j["optimal"] = s.optimal;
      break;
    case Task::counting:
      j["wrong_scoops"] = s.wrong_scoops;
      break;
    case Task::dust:
      j["dusted_bottom"] = s.dusted_bottom;
      j["dusted_top"] = s.dusted_top;
      j["replaced_bottom"] = s.replaced_bottom;
      j["replaced_top"] = s.replaced_top;
      break;
  }
  return j;
}

TaskScore task_score_from_json(const json& j) {
  TaskScore s;
  s.task = task_from_string(j.at("task").get<std::string>());
  switch (s.task) {
    case Task::search:
      s.retrieved = j.at("retrieved").get<int>();
      s.optimal = j.at("optimal").get<int>();
      break;
    case Task::counting:
      s.wrong_scoops = j.at("wrong_scoops").get<int>();
      break;
    case Task::dust:
      s.dusted_bottom = j.at("dusted_bottom").get<bool>();
      s.dusted_top = j.at("dusted_top").get<bool>();
      s.replaced_bottom = j.at("replaced_bottom").get<bool>();
      s.replaced_top = j.at("replaced_top").get<bool>();
      break;
  }
  return s;
}

namespace {

void sorted_insert(std::vector<std::string>& xs, const std::string& v) {
  xs.insert(std::upper_bound(xs.begin(), xs.end(), v), v);
}

bool erase_one(std::vector<std::string>& xs, const std::string& v) {
  auto it = std::find(xs.begin(), xs.end(), v);
  if (it == xs.end()) return false;
  xs.erase(it);
  return true;
}

/// Deterministic k-element sample without replacement (order preserved by
/// the partial Fisher-Yates).
std::vector<std::string> sample_distinct(std::mt19937_64& rng,
                                         std::vector<std::string> pool,
                                         std::size_t k) {
  for (std::size_t i = 0; i < k && i + 1 < pool.size(); ++i) {
    std::size_t j = i + rng() % (pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(std::min(k, pool.size()));
  return pool;
}

std::mt19937_64 task_rng(Task task, std::uint64_t seed) {
  std::uint64_t salt = 0;
  switch (task) {
    case Task::search: salt = 0x5345u; break;
    case Task::counting: salt = 0x434fu; break;
    case Task::dust: salt = 0x4455u; break;
  }
  return std::mt19937_64(seed * 0x9e3779b97f4a7c15ull + salt);
}

json opt_to_json(const std::optional<std::string>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<std::string> opt_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

json pair_to_json(const std::optional<std::pair<std::string, std::string>>& v) {
  return v ? json{v->first, v->second} : json(nullptr);
}

std::optional<std::pair<std::string, std::string>> pair_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return std::make_pair(j.at(0).get<std::string>(), j.at(1).get<std::string>());
}

// ───────────────────────── search ─────────────────────────

class SearchEnv final : public TaskEnv {
 public:
  SearchEnv(std::uint64_t seed, bool adversarial) : seed_(seed) {
    for (const auto& bin : bin_names()) bins_[bin] = {};
    auto rng = task_rng(Task::search, seed);
    std::size_t n = 3 + rng() % 3;
    auto objects = sample_distinct(rng, search_objects(), n);
    for (const auto& o : objects) {
      sorted_insert(bins_[bin_names()[rng() % 3]], o);
    }
    auto targets = sample_distinct(rng, objects, 3);
    if (adversarial) {
      // First target away from the prior's first bin, a later target in a
      // bin that must be inspected on the way: knowing where it was seen is
      // worth an optimal-path point.
      for (auto& [bin, contents] : bins_) contents.clear();
      sorted_insert(bins_["center"], targets[0]);
      sorted_insert(bins_["left"], targets[1]);
      sorted_insert(bins_[bin_names()[rng() % 3]], targets[2]);
      for (const auto& o : objects) {
        bool is_target = std::find(targets.begin(), targets.end(), o) != targets.end();
        if (!is_target) sorted_insert(bins_[bin_names()[rng() % 3]], o);
      }
    }
    targets_ = targets;
    original_ = bins_;
    inspected_at_start_.assign(3, {});
    look_counts_.assign(3, 0);
  }

  explicit SearchEnv(const json& w) : seed_(w.value("seed", 0ull)) {
    for (const auto& bin : bin_names()) {
      bins_[bin] = w.at("bins").at(bin).get<std::vector<std::string>>();
      original_[bin] = w.at("original_bins").at(bin).get<std::vector<std::string>>();
    }
    targets_ = w.at("targets").get<std::vector<std::string>>();
    target_idx_ = w.at("target_idx").get<int>();
    holding_ = opt_from_json(w.at("holding"));
    white_ = w.at("white").get<std::vector<std::string>>();
    inspecting_ = opt_from_json(w.at("inspecting"));
    look_counts_ = w.at("look_counts").get<std::vector<int>>();
    for (const auto& arr : w.at("inspected_at_start")) {
      inspected_at_start_.push_back(
          std::set<std::string>(arr.begin(), arr.end()));
    }
    auto ins = w.at("inspected").get<std::vector<std::string>>();
    inspected_ = std::set<std::string>(ins.begin(), ins.end());
  }

  Task task() const override { return Task::search; }
  std::uint64_t seed() const override { return seed_; }

  Observation observe(FrameIndex idx) override {
    Observation o;
    o.index = idx;
    o.task = Task::search;
    o.search.instruction = instruction();
    o.search.inspecting = inspecting_;
    if (inspecting_) o.search.inspected_contents = bins_.at(*inspecting_);
    o.search.holding = holding_;
    o.search.white_bin = white_;
    return o;
  }

  ApplyResult apply(const Action& a) override {
    ApplyResult r;
    if (a.kind == ActionKind::hold || a.kind == ActionKind::retry) {
      r.terminal = terminal();
      return r;
    }
    auto sticky = inspecting_;
    inspecting_.reset();
    switch (a.kind) {
      case ActionKind::move_to:
      case ActionKind::park:
        r.note = "transit";
        break;
      case ActionKind::look: {
        if (!bins_.count(a.target)) {
          inspecting_ = sticky;
          r.illegal = true;
          r.note = "no bin '" + a.target + "'";
          break;
        }
        inspecting_ = a.target;
        inspected_.insert(a.target);
        if (target_idx_ < 3) ++look_counts_[static_cast<std::size_t>(target_idx_)];
        r.note = "inspecting " + a.target;
        break;
      }
      case ActionKind::grasp: {
        if (holding_ == a.object && !a.object.empty()) {
          r.note = "already holding " + a.object;
          break;
        }
        if (holding_ || !bins_.count(a.target) ||
            !erase_one(bins_[a.target], a.object)) {
          inspecting_ = sticky;
          r.illegal = true;
          r.note = "cannot grasp '" + a.object + "' from '" + a.target + "'";
          break;
        }
        holding_ = a.object;
        r.note = "grasped " + a.object;
        break;
      }
      case ActionKind::place: {
        if (a.target != "white" || !holding_ || *holding_ != a.object) {
          inspecting_ = sticky;
          r.illegal = true;
          r.note = "cannot place '" + a.object + "'";
          break;
        }
        sorted_insert(white_, a.object);
        holding_.reset();
        r.note = "placed " + a.object + " in white bin";
        advance_instruction();
        break;
      }
      default:
        inspecting_ = sticky;
        r.illegal = true;
        r.note = "action not in this task";
        break;
    }
    r.terminal = terminal();
    return r;
  }

  bool terminal() const override { return target_idx_ >= 3; }

  std::string instruction() const override {
    if (target_idx_ >= 3) return "";
    return "retrieve the " + targets_[static_cast<std::size_t>(target_idx_)] +
           " and put it in the white bin";
  }

  json hidden_state() const override {
    json bins, original;
    for (const auto& [bin, contents] : bins_) bins[bin] = contents;
    for (const auto& [bin, contents] : original_) original[bin] = contents;
    json starts = json::array();
    for (const auto& s : inspected_at_start_) {
      starts.push_back(std::vector<std::string>(s.begin(), s.end()));
    }
    return json{{"task", "search"},
                {"seed", seed_},
                {"bins", bins},
                {"original_bins", original},
                {"targets", targets_},
                {"target_idx", target_idx_},
                {"holding", opt_to_json(holding_)},
                {"white", white_},
                {"inspecting", opt_to_json(inspecting_)},
                {"look_counts", look_counts_},
                {"inspected_at_start", starts},
                {"inspected",
                 std::vector<std::string>(inspected_.begin(), inspected_.end())}};
  }

  TaskScore score_now() const override {
    TaskScore s;
    s.task = Task::search;
    for (int i = 0; i < 3; ++i) {
      const auto& target = targets_[static_cast<std::size_t>(i)];
      bool got = std::find(white_.begin(), white_.end(), target) != white_.end();
      if (got) ++s.retrieved;
      if (got && look_counts_[static_cast<std::size_t>(i)] == minimal_looks(i)) {
        ++s.optimal;
      }
    }
    return s;
  }

  /// Fewest inspections that could have located target i, given what had
  /// been inspected when its instruction started and the left-to-right
  /// exploration order.
  int minimal_looks(int i) const {
    const auto& target = targets_[static_cast<std::size_t>(i)];
    std::string home;
    for (const auto& [bin, contents] : original_) {
      if (std::find(contents.begin(), contents.end(), target) != contents.end()) {
        home = bin;
      }
    }
    const auto& known = inspected_at_start_[static_cast<std::size_t>(i)];
    if (known.count(home)) return 0;
    int rank = 0;
    for (const auto& bin : bin_names()) {
      if (known.count(bin)) continue;
      ++rank;
      if (bin == home) return rank;
    }
    return rank;
  }

 private:
  void advance_instruction() {
    ++target_idx_;
    if (target_idx_ < 3) {
      inspected_at_start_[static_cast<std::size_t>(target_idx_)] = inspected_;
    }
  }

  std::uint64_t seed_;
  std::map<std::string, std::vector<std::string>> bins_, original_;
  std::vector<std::string> targets_;
  int target_idx_ = 0;
  std::optional<std::string> holding_;
  std::vector<std::string> white_;
  std::optional<std::string> inspecting_;
  std::vector<int> look_counts_;
  std::vector<std::set<std::string>> inspected_at_start_;
  std::set<std::string> inspected_;
};

// ───────────────────────── counting ─────────────────────────

class CountingEnv final : public TaskEnv {
 public:
  explicit CountingEnv(std::uint64_t seed) : seed_(seed) {
    auto rng = task_rng(Task::counting, seed);
    auto ings = ingredients();
    auto colors = bowl_colors();
    if (rng() % 2) std::swap(ings[0], ings[1]);
    if (rng() % 2) std::swap(colors[0], colors[1]);
    for (int k = 0; k < 2; ++k) {
      requests_.push_back({ings[static_cast<std::size_t>(k)],
                           colors[static_cast<std::size_t>(k)],
                           2 + static_cast<int>(rng() % 3)});
    }
  }

  explicit CountingEnv(const json& w) : seed_(w.value("seed", 0ull)) {
    for (const auto& r : w.at("requests")) {
      requests_.push_back({r.at("ingredient").get<std::string>(),
                           r.at("color").get<std::string>(),
                           r.at("count").get<int>()});
    }
    for (const auto& c : w.at("completed")) {
      completed_[{c.at(0).get<std::string>(), c.at(1).get<std::string>()}] =
          c.at(2).get<int>();
    }
    held_ = w.at("held").get<bool>();
    ready_ = w.at("ready").get<bool>();
    dropped_ = w.at("dropped").get<bool>();
    pending_pour_ = pair_from_json(w.at("pending_pour"));
  }

  Task task() const override { return Task::counting; }
  std::uint64_t seed() const override { return seed_; }

  Observation observe(FrameIndex idx) override {
    Observation o;
    o.index = idx;
    o.task = Task::counting;
    o.counting.instruction = instruction();
    o.counting.scooper_held = held_;
    o.counting.arm_ready = ready_;
    o.counting.pour = pending_pour_;
    pending_pour_.reset();  // a pour is visible in exactly one frame
    return o;
  }

  ApplyResult apply(const Action& a) override {
    ApplyResult r;
    switch (a.kind) {
      case ActionKind::hold:
      case ActionKind::retry:
      case ActionKind::move_to:
        r.note = a.kind == ActionKind::move_to ? "transit" : "hold";
        break;
      case ActionKind::grasp: {
        if (a.target != "scooper") {
          r.illegal = true;
          r.note = "nothing to grasp";
          break;
        }
        if (held_) {
          r.note = "already holding scooper";
          break;
        }
        held_ = true;
        ready_ = true;
        r.note = "picked up scooper";
        break;
      }
      case ActionKind::pour: {
        bool known_pair =
            std::find(ingredients().begin(), ingredients().end(), a.object) !=
                ingredients().end() &&
            std::find(bowl_colors().begin(), bowl_colors().end(), a.target) !=
                bowl_colors().end();
        if (!held_ || !ready_ || !known_pair) {
          r.illegal = true;
          r.note = "cannot pour";
          break;
        }
        ++completed_[{a.object, a.target}];
        ready_ = false;
        pending_pour_ = std::make_pair(a.object, a.target);
        r.note = "poured " + a.object + " into " + a.target + " bowl";
        break;
      }
      case ActionKind::park: {
        if (!held_) {
          r.illegal = true;
          r.note = "no scooper in hand";
          break;
        }
        ready_ = true;
        r.note = "scooper reset";
        break;
      }
      case ActionKind::place: {
        if (!held_) {
          r.illegal = true;
          r.note = "no scooper in hand";
          break;
        }
        held_ = false;
        ready_ = false;
        dropped_ = true;
        r.note = "dropped scooper";
        break;
      }
      default:
        r.illegal = true;
        r.note = "action not in this task";
        break;
    }
    r.terminal = terminal();
    return r;
  }

  bool terminal() const override { return dropped_; }

  std::string instruction() const override {
    const auto& a = requests_[0];
    const auto& b = requests_[1];
    return "get " + number_word(a.count) + " scoops of " + a.ingredient +
           " and put it in the " + a.color + " bowl, and " +
           number_word(b.count) + " scoops of " + b.ingredient +
           " and put it in the " + b.color + " bowl";
  }

  json hidden_state() const override {
    json reqs = json::array();
    for (const auto& r : requests_) {
      reqs.push_back({{"ingredient", r.ingredient},
                      {"color", r.color},
                      {"count", r.count}});
    }
    json done = json::array();
    for (const auto& [pair, n] : completed_) {
      done.push_back({pair.first, pair.second, n});
    }
    return json{{"task", "counting"}, {"seed", seed_},
                {"requests", reqs},   {"completed", done},
                {"held", held_},      {"ready", ready_},
                {"dropped", dropped_}, {"pending_pour", pair_to_json(pending_pour_)}};
  }

  TaskScore score_now() const override {
    TaskScore s;
    s.task = Task::counting;
    std::map<std::pair<std::string, std::string>, int> wanted;
    for (const auto& r : requests_) wanted[{r.ingredient, r.color}] = r.count;
    for (const auto& ing : ingredients()) {
      for (const auto& color : bowl_colors()) {
        int want = 0, got = 0;
        if (auto it = wanted.find({ing, color}); it != wanted.end()) want = it->second;
        if (auto it = completed_.find({ing, color}); it != completed_.end()) {
          got = it->second;
        }
        s.wrong_scoops += std::abs(want - got);
      }
    }
    return s;
  }

 private:
  struct Request {
    std::string ingredient, color;
    int count = 0;
  };

  std::uint64_t seed_;
  std::vector<Request> requests_;
  std::map<std::pair<std::string, std::string>, int> completed_;
  bool held_ = false, ready_ = false, dropped_ = false;
  std::optional<std::pair<std::string, std::string>> pending_pour_;
};

// ───────────────────────── dust ─────────────────────────

class DustEnv final : public TaskEnv {
 public:
  DustEnv(std::uint64_t seed, bool adversarial) : seed_(seed) {
    auto rng = task_rng(Task::dust, seed);
    auto objs = sample_distinct(rng, shelf_objects(), 2);
    if (adversarial && objs[0] > objs[1]) std::swap(objs[0], objs[1]);
    if (adversarial) {
      // Bottom object sorts after the top one, so replacing "first table
      // object to the bottom shelf" restores the wrong layout.
      original_["bottom"] = objs[1];
      original_["top"] = objs[0];
    } else {
      original_["bottom"] = objs[0];
      original_["top"] = objs[1];
    }
    shelf_["bottom"] = original_["bottom"];
    shelf_["top"] = original_["top"];
  }

  explicit DustEnv(const json& w) : seed_(w.value("seed", 0ull)) {
    for (const auto& s : shelf_names()) {
      original_[s] = w.at("original").at(s).get<std::string>();
      shelf_[s] = opt_from_json(w.at("shelf").at(s));
      dusted_[s] = w.at("dusted").at(s).get<bool>();
      placed_[s] = w.at("placed").at(s).get<bool>();
    }
    auto t = w.at("table").get<std::vector<std::string>>();
    table_ = std::set<std::string>(t.begin(), t.end());
    duster_held_ = w.at("duster_held").get<bool>();
    stroke_ = opt_from_json(w.at("stroke"));
    removal_ = pair_from_json(w.at("removal"));
    placement_ = pair_from_json(w.at("placement"));
  }

  Task task() const override { return Task::dust; }
  std::uint64_t seed() const override { return seed_; }

  Observation observe(FrameIndex idx) override {
    Observation o;
    o.index = idx;
    o.task = Task::dust;
    o.dust.instruction = instruction();
    o.dust.shelf_bottom = shelf_.at("bottom");
    o.dust.shelf_top = shelf_.at("top");
    o.dust.table = std::vector<std::string>(table_.begin(), table_.end());
    o.dust.duster = duster_held_ ? "held" : "station";
    o.dust.stroke = stroke_;
    o.dust.removal = removal_;
    o.dust.placement = placement_;
    return o;
  }

  ApplyResult apply(const Action& a) override {
    ApplyResult r;
    if (a.kind == ActionKind::hold || a.kind == ActionKind::retry) {
      r.note = "hold";
      r.terminal = terminal();
      return r;
    }
    auto st = stroke_;
    auto rm = removal_;
    auto pl = placement_;
    stroke_.reset();
    removal_.reset();
    placement_.reset();
    auto restore = [&] {
      stroke_ = st;
      removal_ = rm;
      placement_ = pl;
    };
    switch (a.kind) {
      case ActionKind::move_to:
        r.note = "transit";
        break;
      case ActionKind::grasp: {
        if (a.target == "duster") {
          if (!duster_held_) {
            duster_held_ = true;
            r.note = "picked up duster";
          } else {
            r.note = "already holding duster";
          }
          break;
        }
        if (!shelf_.count(a.target) || !shelf_.at(a.target)) {
          restore();
          r.illegal = true;
          r.note = "nothing on '" + a.target + "' shelf";
          break;
        }
        std::string obj = *shelf_.at(a.target);
        shelf_[a.target].reset();
        table_.insert(obj);
        removal_ = std::make_pair(a.target, obj);
        r.note = "removed " + obj + " from " + a.target + " shelf";
        break;
      }
      case ActionKind::dust: {
        if (!duster_held_ || !shelf_.count(a.target)) {
          restore();
          r.illegal = true;
          r.note = "cannot dust";
          break;
        }
        dusted_[a.target] = true;
        stroke_ = a.target;
        r.note = "dusting " + a.target + " shelf";
        break;
      }
      case ActionKind::park:
      case ActionKind::place: {
        if (a.target == "station" ||
            (a.kind == ActionKind::park && a.target.empty())) {
          if (!duster_held_) {
            restore();
            r.illegal = true;
            r.note = "duster not in hand";
            break;
          }
          duster_held_ = false;
          r.note = "duster parked";
          break;
        }
        if (!shelf_.count(a.target) || shelf_.at(a.target) ||
            !table_.count(a.object)) {
          restore();
          r.illegal = true;
          r.note = "cannot place '" + a.object + "' on '" + a.target + "'";
          break;
        }
        table_.erase(a.object);
        shelf_[a.target] = a.object;
        placed_[a.target] = true;
        placement_ = std::make_pair(a.target, a.object);
        r.note = "placed " + a.object + " on " + a.target + " shelf";
        break;
      }
      default:
        restore();
        r.illegal = true;
        r.note = "action not in this task";
        break;
    }
    r.terminal = terminal();
    return r;
  }

  bool terminal() const override { return placed_.at("bottom") && placed_.at("top"); }

  std::string instruction() const override {
    return "remove the items from the shelves, dust the shelves, and place "
           "the items back on the shelves";
  }

  json hidden_state() const override {
    json original, shelf, dusted, placed;
    for (const auto& s : shelf_names()) {
      original[s] = original_.at(s);
      shelf[s] = opt_to_json(shelf_.at(s));
      dusted[s] = dusted_.at(s);
      placed[s] = placed_.at(s);
    }
    return json{{"task", "dust"},
                {"seed", seed_},
                {"original", original},
                {"shelf", shelf},
                {"table", std::vector<std::string>(table_.begin(), table_.end())},
                {"duster_held", duster_held_},
                {"dusted", dusted},
                {"placed", placed},
                {"stroke", opt_to_json(stroke_)},
                {"removal", pair_to_json(removal_)},
                {"placement", pair_to_json(placement_)}};
  }

  TaskScore score_now() const override {
    TaskScore s;
    s.task = Task::dust;
    s.dusted_bottom = dusted_.at("bottom");
    s.dusted_top = dusted_.at("top");
    s.replaced_bottom = placed_.at("bottom") && shelf_.at("bottom") == original_.at("bottom");
    s.replaced_top = placed_.at("top") && shelf_.at("top") == original_.at("top");
    return s;
  }

 private:
  std::uint64_t seed_;
  std::map<std::string, std::string> original_;
  std::map<std::string, std::optional<std::string>> shelf_;
  std::set<std::string> table_;
  bool duster_held_ = false;
  std::map<std::string, bool> dusted_{{"bottom", false}, {"top", false}};
  std::map<std::string, bool> placed_{{"bottom", false}, {"top", false}};
  std::optional<std::string> stroke_;
  std::optional<std::pair<std::string, std::string>> removal_, placement_;
};

}  // namespace

std::unique_ptr<TaskEnv> make_env(Task task, std::uint64_t seed) {
  switch (task) {
    case Task::search: return std::make_unique<SearchEnv>(seed, false);
    case Task::counting: return std::make_unique<CountingEnv>(seed);
    case Task::dust: return std::make_unique<DustEnv>(seed, false);
  }
  throw UnknownTask("bad task enum");
}

std::unique_ptr<TaskEnv> env_from_fixture(const json& fixture) {
  const json& w = fixture.contains("world") ? fixture.at("world") : fixture;
  Task task = task_from_string(w.at("task").get<std::string>());
  switch (task) {
    case Task::search: return std::make_unique<SearchEnv>(w);
    case Task::counting: return std::make_unique<CountingEnv>(w);
    case Task::dust: return std::make_unique<DustEnv>(w);
  }
  throw UnknownTask("bad task enum");
}

json make_adversarial_fixture(Task task, std::uint64_t seed) {
  json fixture;
  fixture["task"] = to_string(task);
  fixture["seed"] = seed;
  switch (task) {
    case Task::search:
      fixture["world"] = SearchEnv(seed, true).hidden_state();
      break;
    case Task::counting:
      fixture["world"] = CountingEnv(seed).hidden_state();
      break;
    case Task::dust:
      fixture["world"] = DustEnv(seed, true).hidden_state();
      // Stall the reset long enough that the bottom-shelf stroke frames have
      // left the recent window by the time the next dust decision is due.
      fixture["ll_stall"] = json{{"subtask", "reset duster"},
                                 {"prob", 1.0},
                                 {"max_consecutive", 8}};
      break;
  }
  return fixture;
}

TaskScore score(const TaskEnv& env, bool complete) {
  if (!complete) {
    throw IncompleteEpisode("episode for task " + to_string(env.task()) +
                            " has not ended");
  }
  return env.score_now();
}

std::string state_digest(const TaskEnv& env) {
  return hex64(fnv1a64(env.hidden_state().dump()));
}

}  // namespace kfm
