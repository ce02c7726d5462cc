#include "kfm/policies.hpp"

#include <algorithm>
#include <set>

namespace kfm {

namespace {

// ───────────────────────── instruction parsing ─────────────────────────

std::string slice_between(const std::string& s, const std::string& after,
                          const std::string& before, std::size_t from = 0) {
  auto a = s.find(after, from);
  if (a == std::string::npos) throw InsufficientInformation("cannot read instruction");
  a += after.size();
  auto b = s.find(before, a);
  if (b == std::string::npos) throw InsufficientInformation("cannot read instruction");
  return s.substr(a, b - a);
}

std::string search_target(const std::string& instruction) {
  return slice_between(instruction, "retrieve the ", " and put it in the white bin");
}

int count_from_word(const std::string& w) {
  for (int n = 1; n <= 9; ++n) {
    if (number_word(n) == w) return n;
  }
  throw InsufficientInformation("unknown count word '" + w + "'");
}

struct ScoopRequest {
  std::string ingredient, color;
  int count = 0;
};

std::vector<ScoopRequest> parse_scoop_requests(const std::string& instruction) {
  // get <n> scoops of <ing> and put it in the <color> bowl, and <n> scoops
  // of <ing> and put it in the <color> bowl
  std::vector<ScoopRequest> out;
  ScoopRequest a, b;
  a.count = count_from_word(slice_between(instruction, "get ", " scoops of "));
  a.ingredient = slice_between(instruction, " scoops of ", " and put it in the ");
  a.color = slice_between(instruction, " and put it in the ", " bowl, and ");
  auto rest_at = instruction.find(" bowl, and ");
  auto rest = instruction.substr(rest_at + std::string(" bowl, and ").size());
  b.count = count_from_word(rest.substr(0, rest.find(' ')));
  b.ingredient = slice_between(rest, " scoops of ", " and put it in the ");
  b.color = slice_between(rest, " and put it in the ", " bowl");
  out.push_back(a);
  out.push_back(b);
  return out;
}

// ───────────────────────── evidence ─────────────────────────

struct Evidence {
  // search: last seen contents per bin, and bins known to have been looked in
  std::map<std::string, std::vector<std::string>> contents;
  std::set<std::string> looked;
  // counting: completed pours per (ingredient, color)
  std::map<std::pair<std::string, std::string>, int> pours;
  // dust
  std::set<std::string> dusted;
  std::map<std::string, std::string> removed_obj;  // shelf -> object
  std::set<std::string> placed;
};

void fold_frame(Evidence& ev, const Observation& o) {
  switch (o.task) {
    case Task::search:
      if (o.search.inspecting) {
        ev.contents[*o.search.inspecting] = o.search.inspected_contents;
        ev.looked.insert(*o.search.inspecting);
      }
      break;
    case Task::counting:
      if (o.counting.pour) ++ev.pours[*o.counting.pour];
      break;
    case Task::dust:
      if (o.dust.stroke) ev.dusted.insert(*o.dust.stroke);
      if (o.dust.removal) ev.removed_obj[o.dust.removal->first] = o.dust.removal->second;
      if (o.dust.placement) ev.placed.insert(o.dust.placement->first);
      break;
  }
}

void fold_label(Evidence& ev, Task task, const std::string& label) {
  auto st = parse_subtask(task, label);
  switch (st.kind) {
    case SubtaskKind::look_bin:
      ev.looked.insert(st.location);
      break;
    case SubtaskKind::place_scoop:
      ++ev.pours[{st.object, st.location}];
      break;
    case SubtaskKind::dust_bottom:
      ev.dusted.insert("bottom");
      break;
    case SubtaskKind::dust_top:
      ev.dusted.insert("top");
      break;
    case SubtaskKind::place_bottom:
      ev.placed.insert("bottom");
      break;
    case SubtaskKind::place_top:
      ev.placed.insert("top");
      break;
    default:
      break;  // labels without durable consequences
  }
}

/// Distinct event frames must be folded once each. A sticky event spans
/// frames, but its evidence is idempotent (set inserts / map overwrites);
/// only pours are counted, and a pour is visible in exactly one frame.
Evidence gather(Task task, const std::vector<const Observation*>& keyframes,
                const std::vector<const Observation*>& window,
                const std::vector<std::string>& text) {
  Evidence ev;
  for (const auto* f : keyframes) fold_frame(ev, *f);
  for (const auto* f : window) fold_frame(ev, *f);
  for (const auto& label : text) fold_label(ev, task, label);
  return ev;
}

// ───────────────────────── decision engines ─────────────────────────

Subtask search_decide(const HlContext& view, const Evidence& ev) {
  const auto& newest = view.window.back()->search;
  std::string target = search_target(view.instruction);
  std::string source;
  for (const auto& [bin, items] : ev.contents) {
    if (std::find(items.begin(), items.end(), target) != items.end()) source = bin;
  }
  if (newest.holding == target) {
    // mid-carry; the source slot only matters for the grasp, which is done
    return take_object(target, source.empty() ? bin_names().front() : source);
  }
  if (!source.empty()) return take_object(target, source);
  for (const auto& bin : bin_names()) {
    if (!ev.looked.count(bin)) return look_bin(bin);
  }
  throw InsufficientInformation("target '" + target + "' not in any inspected bin");
}

Subtask counting_decide(const HlContext& view, const Evidence& ev) {
  const auto& newest = view.window.back()->counting;
  auto requests = parse_scoop_requests(view.instruction);
  if (!newest.scooper_held) return pick_scooper();
  for (const auto& r : requests) {
    int done = 0;
    if (auto it = ev.pours.find({r.ingredient, r.color}); it != ev.pours.end()) {
      done = it->second;
    }
    if (done < r.count) {
      if (newest.arm_ready) return place_scoop(r.ingredient, r.color);
      return reset_scooper();
    }
  }
  return drop_scooper();
}

Subtask dust_decide(const HlContext& view, const Evidence& ev) {
  const auto& newest = view.window.back()->dust;
  if (newest.shelf_bottom && !ev.placed.count("bottom")) return remove_shelf("bottom");
  if (newest.shelf_top && !ev.placed.count("top")) return remove_shelf("top");
  bool dusted_b = ev.dusted.count("bottom") > 0;
  bool dusted_t = ev.dusted.count("top") > 0;
  if (!dusted_b || !dusted_t) {
    if (newest.duster != "held") return pick_duster();
    // a visible stroke means the duster has not been reset since it
    if (newest.stroke) return reset_duster();
    if (!dusted_b) return dust_shelf("bottom");
    return dust_shelf("top");
  }
  if (newest.duster == "held") return put_down_duster();
  auto restore = [&](const std::string& shelf) {
    auto it = ev.removed_obj.find(shelf);
    if (it == ev.removed_obj.end()) {
      throw InsufficientInformation("original " + shelf + " object unknown");
    }
    return place_shelf(it->second, shelf);
  };
  if (!newest.shelf_bottom) return restore("bottom");
  if (!newest.shelf_top) return restore("top");
  throw InsufficientInformation("no step left to take");
}

/// Exploration prior: the deterministic thing to do when evidence is
/// insufficient. Cycles search bins so repeated fallbacks still cover the
/// space; restores table objects in listed order, which is only correct by
/// luck.
Subtask fallback_decide(const HlContext& view) {
  const auto& newest = *view.window.back();
  switch (newest.task) {
    case Task::search: {
      std::size_t turn = static_cast<std::size_t>(view.tick / 2) % bin_names().size();
      return look_bin(bin_names()[turn]);
    }
    case Task::counting: {
      if (!newest.counting.scooper_held) return pick_scooper();
      if (!newest.counting.arm_ready) return reset_scooper();
      auto requests = parse_scoop_requests(view.instruction);
      return place_scoop(requests[0].ingredient, requests[0].color);
    }
    case Task::dust: {
      const auto& d = newest.dust;
      if (!d.shelf_bottom && !d.table.empty()) {
        return place_shelf(d.table.front(), "bottom");
      }
      if (!d.shelf_top && !d.table.empty()) {
        return place_shelf(d.table.front(), "top");
      }
      return pick_duster();
    }
  }
  throw UnknownTask("bad task enum");
}

// ───────────────────────── nominations ─────────────────────────

/// Serialized event content of a frame, or empty when the frame carries no
/// event. Used to spot the first frame of each event span.
std::string event_signature(const Observation& o) {
  switch (o.task) {
    case Task::search: {
      if (!o.search.inspecting) return "";
      std::string sig = "ins:" + *o.search.inspecting;
      for (const auto& item : o.search.inspected_contents) sig += "|" + item;
      return sig;
    }
    case Task::counting:
      if (!o.counting.pour) return "";
      return "pour:" + o.counting.pour->first + "|" + o.counting.pour->second;
    case Task::dust: {
      const auto& d = o.dust;
      if (!d.stroke && !d.removal && !d.placement) return "";
      std::string sig = "dust:";
      if (d.stroke) sig += "s=" + *d.stroke;
      if (d.removal) sig += ";r=" + d.removal->first + "|" + d.removal->second;
      if (d.placement) sig += ";p=" + d.placement->first + "|" + d.placement->second;
      return sig;
    }
  }
  return "";
}

/// Window positions (1-indexed) where an event becomes visible. A span
/// truncated by the window start is skipped: its first frame was nominated
/// while still visible on earlier decisions.
std::vector<int> nominate_new_events(const HlContext& ctx) {
  std::vector<int> out;
  const auto& w = ctx.window;
  auto len = static_cast<int>(w.size());
  bool covers_episode_start = ctx.tick + 1 == static_cast<std::int64_t>(w.size());
  for (int p = 1; p <= len; ++p) {
    auto sig = event_signature(*w[static_cast<std::size_t>(p - 1)]);
    if (sig.empty()) continue;
    if (p == 1) {
      if (covers_episode_start) out.push_back(p);
      continue;
    }
    if (event_signature(*w[static_cast<std::size_t>(p - 2)]) != sig) out.push_back(p);
  }
  return out;
}

}  // namespace

std::string to_string(MemoryView v) {
  switch (v) {
    case MemoryView::full: return "oracle";
    case MemoryView::newest_only: return "none";
    case MemoryView::window_only: return "short";
    case MemoryView::text_only: return "text";
  }
  throw ConfigError("bad memory view");
}

HlDecision EvidenceHl::decide(const HlContext& ctx) {
  if (ctx.window.empty()) throw EmptyWindow("decision without frames");

  HlContext view;
  view.tick = ctx.tick;
  view.instruction = ctx.instruction;
  switch (view_) {
    case MemoryView::full:
      view.window = ctx.window;
      view.keyframes = ctx.keyframes;
      break;
    case MemoryView::newest_only:
      view.window = {ctx.window.back()};
      break;
    case MemoryView::window_only:
      view.window = ctx.window;
      break;
    case MemoryView::text_only:
      view.window = {ctx.window.back()};
      view.text_memory = ctx.text_memory;
      break;
  }

  Task task = view.window.back()->task;
  Evidence ev = gather(task, view.keyframes, view.window, view.text_memory);

  HlDecision d;
  try {
    Subtask st;
    switch (task) {
      case Task::search: st = search_decide(view, ev); break;
      case Task::counting: st = counting_decide(view, ev); break;
      case Task::dust: st = dust_decide(view, ev); break;
    }
    d.subtask = st.label();
  } catch (const InsufficientInformation&) {
    d.subtask = fallback_decide(view).label();
    d.fallback = true;
  }
  // nominations always come from the true window; the view restriction is
  // about what the decision may read, not what the memory stores
  d.nominate = nominate_new_events(ctx);
  return d;
}

NoisyNominator::NoisyNominator(std::unique_ptr<HlPolicy> inner, int jitter,
                               std::uint64_t seed)
    : inner_(std::move(inner)), jitter_(jitter), rng_(seed) {
  if (jitter_ < 0) throw ConfigError("jitter must be >= 0");
}

std::string NoisyNominator::name() const {
  return "noisy:" + std::to_string(jitter_) + "(" + inner_->name() + ")";
}

HlDecision NoisyNominator::decide(const HlContext& ctx) {
  HlDecision d = inner_->decide(ctx);
  if (jitter_ == 0) return d;

  auto len = static_cast<int>(ctx.window.size());
  for (int p : d.nominate) {
    FrameIndex abs = ctx.tick - len + p;
    pending_[abs] = 5;
  }
  std::vector<int> emitted;
  for (auto it = pending_.begin(); it != pending_.end();) {
    auto rel = static_cast<int>(it->first - ctx.tick + len);
    if (rel < 1) {
      it = pending_.erase(it);  // slid out of the window before re-emission
      continue;
    }
    int p = rel;
    if (rng_() % 4 == 0) {
      int offset = 1 + static_cast<int>(rng_() % static_cast<std::uint64_t>(jitter_));
      if (rng_() % 2) offset = -offset;
      p = std::clamp(rel + offset, 1, len);
    }
    emitted.push_back(p);
    if (--it->second <= 0) {
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  std::sort(emitted.begin(), emitted.end());
  d.nominate = std::move(emitted);
  return d;
}

int ScriptedLl::duration_ticks(SubtaskKind kind) {
  switch (kind) {
    case SubtaskKind::look_bin: return 6;
    case SubtaskKind::take_object: return 5;
    case SubtaskKind::pick_scooper: return 3;
    case SubtaskKind::place_scoop: return 5;
    case SubtaskKind::reset_scooper: return 3;
    case SubtaskKind::drop_scooper: return 2;
    case SubtaskKind::remove_bottom:
    case SubtaskKind::remove_top: return 6;
    case SubtaskKind::pick_duster: return 3;
    case SubtaskKind::dust_bottom:
    case SubtaskKind::dust_top: return 4;
    case SubtaskKind::reset_duster: return 3;
    case SubtaskKind::put_down_duster: return 3;
    case SubtaskKind::place_bottom:
    case SubtaskKind::place_top: return 6;
  }
  throw UnknownSubtask("bad subtask kind");
}

namespace {

Action hold_action() { return {ActionKind::hold, "", ""}; }

/// Full micro-plan for a subtask, duration_ticks * exec actions long.
/// Grasps lead; the action that changes the world durably comes last;
/// everything between is padding that keeps the arm busy.
std::vector<Action> compile_plan(const Subtask& st, const Observation& o,
                                 int exec) {
  int n = ScriptedLl::duration_ticks(st.kind) * exec;
  std::vector<Action> plan(static_cast<std::size_t>(n), hold_action());
  auto first = [&](Action a) { plan.front() = a; };
  auto last = [&](Action a) { plan.back() = a; };
  switch (st.kind) {
    case SubtaskKind::look_bin:
      first({ActionKind::move_to, st.location, ""});
      last({ActionKind::look, st.location, ""});
      break;
    case SubtaskKind::take_object:
      if (o.search.holding == st.object) {
        first({ActionKind::move_to, "white", ""});
      } else {
        first({ActionKind::grasp, st.location, st.object});
        plan[1] = {ActionKind::move_to, "white", ""};
      }
      last({ActionKind::place, "white", st.object});
      break;
    case SubtaskKind::pick_scooper:
      if (!o.counting.scooper_held) first({ActionKind::grasp, "scooper", ""});
      break;
    case SubtaskKind::place_scoop:
      first({ActionKind::move_to, st.object, ""});
      last({ActionKind::pour, st.location, st.object});
      break;
    case SubtaskKind::reset_scooper:
      last({ActionKind::park, "", ""});
      break;
    case SubtaskKind::drop_scooper:
      last({ActionKind::place, "table", "scooper"});
      break;
    case SubtaskKind::remove_bottom:
    case SubtaskKind::remove_top:
      first({ActionKind::move_to, st.location, ""});
      last({ActionKind::grasp, st.location, ""});
      break;
    case SubtaskKind::pick_duster:
      if (o.dust.duster != "held") first({ActionKind::grasp, "duster", ""});
      break;
    case SubtaskKind::dust_bottom:
    case SubtaskKind::dust_top:
      first({ActionKind::move_to, st.location, ""});
      last({ActionKind::dust, st.location, ""});
      break;
    case SubtaskKind::reset_duster:
      // a plain motion: clears the stroke without letting go of the duster
      last({ActionKind::move_to, "station", ""});
      break;
    case SubtaskKind::put_down_duster:
      last({ActionKind::place, "station", "duster"});
      break;
    case SubtaskKind::place_bottom:
    case SubtaskKind::place_top:
      first({ActionKind::move_to, st.location, ""});
      last({ActionKind::place, st.location, st.object});
      break;
  }
  return plan;
}

}  // namespace

ScriptedLl::ScriptedLl(int chunk_len, int open_loop_exec, FailureProfile profile)
    : chunk_len_(chunk_len),
      exec_(open_loop_exec),
      profile_(std::move(profile)),
      rng_(profile_.seed) {
  if (chunk_len_ < 1 || exec_ < 1 || exec_ > chunk_len_) {
    throw ConfigError("bad chunk geometry");
  }
  if (profile_.max_consecutive < 0) throw ConfigError("bad failure bound");
}

std::vector<Action> ScriptedLl::plan(const LlContext& ctx) {
  if (ctx.newest == nullptr) throw EmptyWindow("no frame to plan from");
  if (ctx.subtask != label_) {
    label_ = ctx.subtask;
    progress_ = 0;
    consecutive_fails_ = 0;
  }
  Subtask st = parse_subtask(ctx.newest->task, ctx.subtask);  // UnknownSubtask
  auto full = compile_plan(st, *ctx.newest, exec_);
  auto ticks = static_cast<int>(full.size()) / exec_;

  std::vector<Action> out;
  out.reserve(static_cast<std::size_t>(chunk_len_));
  if (progress_ < ticks) {
    double p = profile_.default_prob;
    std::size_t best = 0;
    for (const auto& [key, prob] : profile_.per_subtask) {
      if (ctx.subtask.find(key) != std::string::npos && key.size() >= best) {
        best = key.size();
        p = prob;
      }
    }
    bool fail = false;
    if (p > 0.0 && consecutive_fails_ < profile_.max_consecutive) {
      double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      fail = u < p;
    }
    if (fail) {
      ++consecutive_fails_;
      out.assign(static_cast<std::size_t>(chunk_len_),
                 Action{ActionKind::retry, "", ""});
      return out;
    }
    consecutive_fails_ = 0;
    for (int i = progress_ * exec_; i < progress_ * exec_ + chunk_len_; ++i) {
      out.push_back(i < static_cast<int>(full.size())
                        ? full[static_cast<std::size_t>(i)]
                        : hold_action());
    }
    ++progress_;
  } else {
    // plan exhausted; idle without disturbing anything until the next commit
    out.assign(static_cast<std::size_t>(chunk_len_), hold_action());
  }
  return out;
}

std::unique_ptr<HlPolicy> make_hl_policy(const std::string& spec,
                                         std::uint64_t seed) {
  if (spec == "oracle") return std::make_unique<EvidenceHl>(MemoryView::full);
  if (spec == "none") return std::make_unique<EvidenceHl>(MemoryView::newest_only);
  if (spec == "short") return std::make_unique<EvidenceHl>(MemoryView::window_only);
  if (spec == "text") return std::make_unique<EvidenceHl>(MemoryView::text_only);
  if (spec.rfind("noisy:", 0) == 0) {
    int j = 0;
    try {
      j = std::stoi(spec.substr(6));
    } catch (const std::exception&) {
      throw ConfigError("bad jitter in policy spec '" + spec + "'");
    }
    return std::make_unique<NoisyNominator>(
        std::make_unique<EvidenceHl>(MemoryView::full), j, seed);
  }
  throw ConfigError("unknown policy spec '" + spec + "'");
}

}  // namespace kfm
