#include "kfm/orchestrator.hpp"

#include <functional>
#include <set>

#include "kfm/clock.hpp"
#include "kfm/scene.hpp"

namespace kfm {

using nlohmann::json;

void RunConfig::validate() const {
  if (obs_period_ms <= 0 || hl_period_ms <= 0 || ll_period_ms <= 0) {
    throw ConfigError("periods must be positive");
  }
  if (hl_period_ms < obs_period_ms) {
    throw ConfigError("deliberation cannot run faster than observation");
  }
  if (chunk_len < 1) throw ConfigError("chunk_len must be at least 1");
  if (open_loop_exec < 1 || open_loop_exec > chunk_len) {
    throw ConfigError("open_loop_exec must be in [1, chunk_len]");
  }
  if (window < 1) throw ConfigError("window must be at least 1");
  if (merge_distance < 0) throw ConfigError("merge_distance must be >= 0");
  if (keyframe_cap < 1) throw ConfigError("keyframe_cap must be at least 1");
  if (max_ticks < 1) throw ConfigError("max_ticks must be at least 1");
}

json to_json(const RunConfig& cfg) {
  return json{{"obs_period_ms", cfg.obs_period_ms},
              {"hl_period_ms", cfg.hl_period_ms},
              {"ll_period_ms", cfg.ll_period_ms},
              {"chunk_len", cfg.chunk_len},
              {"open_loop_exec", cfg.open_loop_exec},
              {"window", cfg.window},
              {"merge_distance", cfg.merge_distance},
              {"keyframe_cap", cfg.keyframe_cap},
              {"max_ticks", cfg.max_ticks}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  cfg.obs_period_ms = j.value("obs_period_ms", cfg.obs_period_ms);
  cfg.hl_period_ms = j.value("hl_period_ms", cfg.hl_period_ms);
  cfg.ll_period_ms = j.value("ll_period_ms", cfg.ll_period_ms);
  cfg.chunk_len = j.value("chunk_len", cfg.chunk_len);
  cfg.open_loop_exec = j.value("open_loop_exec", cfg.open_loop_exec);
  cfg.window = j.value("window", cfg.window);
  cfg.merge_distance = j.value("merge_distance", cfg.merge_distance);
  cfg.keyframe_cap = j.value("keyframe_cap", cfg.keyframe_cap);
  cfg.max_ticks = j.value("max_ticks", cfg.max_ticks);
  return cfg;
}

EpisodeResult run_episode(TaskEnv& env, HlPolicy& hl, LlPolicy& ll,
                          const RunConfig& cfg) {
  cfg.validate();
  EpisodeResult out;
  auto& records = out.records;
  records.push_back(
      {0, recordkind::episode_header,
       json{{"task", to_string(env.task())},
            {"seed", env.seed()},
            {"world", env.hidden_state()},
            {"config", to_json(cfg)},
            {"hl_policy", hl.name()},
            {"ll_policy", ll.name()}}});

  MemoryConfig mcfg;
  mcfg.merge_distance = cfg.merge_distance;
  mcfg.window = cfg.window;
  mcfg.cap = cfg.keyframe_cap;
  KeyframeMemory memory(mcfg);

  std::vector<Observation> frames;
  std::vector<std::string> text_memory;
  std::optional<std::string> latched;
  std::set<FrameIndex> reported_evictions;
  bool done = false;

  auto finish = [&](std::int64_t t, bool completed) {
    if (done) return;
    done = true;
    out.completed = completed;
    out.final_score = env.score_now();
    out.obs_ticks = static_cast<std::int64_t>(frames.size());
    out.digest = state_digest(env);
    records.push_back({t, recordkind::episode_end,
                       json{{"completed", completed},
                            {"score", to_json(out.final_score)},
                            {"digest", out.digest},
                            {"obs_ticks", out.obs_ticks}}});
  };

  if (env.terminal()) {
    finish(0, true);
    return out;
  }

  VirtualClock clock;

  std::function<void(std::int64_t)> obs_cb = [&](std::int64_t now) {
    if (done) return;
    if (static_cast<std::int64_t>(frames.size()) >= cfg.max_ticks) {
      records.push_back({now, recordkind::timeout_at_max_ticks,
                         json{{"max_ticks", cfg.max_ticks}}});
      finish(now, false);
      return;
    }
    auto idx = static_cast<FrameIndex>(frames.size());
    frames.push_back(env.observe(idx));
    records.push_back({now, recordkind::observation,
                       json{{"index", idx},
                            {"ref", frame_ref(frames.back())},
                            {"frame", to_json(frames.back())}}});
    clock.schedule(now + cfg.obs_period_ms, obs_cb);
  };

  std::function<void(std::int64_t)> hl_cb = [&](std::int64_t now) {
    if (done) return;
    if (frames.empty()) {
      throw EmptyWindow("deliberation scheduled before the first frame");
    }
    auto tick = static_cast<FrameIndex>(frames.size()) - 1;
    auto len = static_cast<int>(
        std::min<std::size_t>(frames.size(), static_cast<std::size_t>(cfg.window)));

    HlContext ctx;
    ctx.tick = tick;
    ctx.instruction = frames.back().instruction();
    for (std::size_t i = frames.size() - static_cast<std::size_t>(len);
         i < frames.size(); ++i) {
      ctx.window.push_back(&frames[i]);
    }
    auto capped = enforce_cap(memory.selected_keyframes(tick), cfg.keyframe_cap);
    std::vector<FrameIndex> newly_evicted;
    for (auto e : capped.evicted) {
      if (reported_evictions.insert(e).second) newly_evicted.push_back(e);
    }
    if (!newly_evicted.empty()) {
      records.push_back({now, recordkind::cap_eviction,
                         json{{"tick", tick}, {"evicted", newly_evicted}}});
    }
    for (auto k : capped.kept.indices) {
      ctx.keyframes.push_back(&frames[static_cast<std::size_t>(k)]);
    }
    ctx.text_memory = text_memory;

    HlDecision d;
    try {
      d = hl.decide(ctx);
    } catch (const PolicyError&) {
      throw;
    } catch (const std::exception& e) {
      throw PolicyError("deliberator failed at tick " + std::to_string(tick) +
                            ": " + e.what(),
                        tick);
    }

    auto batch = NominationBatch::from_positions(tick, len, d.nominate);
    memory.ingest(batch);
    records.push_back({now, recordkind::hl_decision,
                       json{{"tick", tick},
                            {"subtask", d.subtask},
                            {"nominate", d.nominate},
                            {"abs", batch.abs_indices},
                            {"fallback", d.fallback},
                            {"keyframes", capped.kept.indices}}});
    if (!latched || *latched != d.subtask) {
      latched = d.subtask;
      text_memory.push_back(d.subtask);
      records.push_back({now, recordkind::subtask_committed,
                         json{{"subtask", d.subtask}, {"tick", tick}}});
    }
    clock.schedule(now + cfg.hl_period_ms, hl_cb);
  };

  std::function<void(std::int64_t)> ll_cb = [&](std::int64_t now) {
    if (done) return;
    if (env.terminal()) {
      finish(now, true);
      return;
    }
    if (frames.empty()) {
      throw EmptyWindow("action policy scheduled before the first frame");
    }
    if (!latched) {
      throw NoSubtaskYet("action policy ran before any subtask commit");
    }
    auto tick = static_cast<FrameIndex>(frames.size()) - 1;
    LlContext ctx;
    ctx.tick = tick;
    ctx.subtask = *latched;
    ctx.newest = &frames.back();

    std::vector<Action> chunk;
    try {
      chunk = ll.plan(ctx);
    } catch (const PolicyError&) {
      throw;
    } catch (const std::exception& e) {
      throw PolicyError("action policy failed at tick " + std::to_string(tick) +
                            ": " + e.what(),
                        tick);
    }
    if (static_cast<int>(chunk.size()) != cfg.chunk_len) {
      throw PolicyError("chunk has " + std::to_string(chunk.size()) +
                            " actions, expected " + std::to_string(cfg.chunk_len),
                        tick);
    }
    json acts = json::array();
    for (const auto& a : chunk) acts.push_back(to_json(a));
    records.push_back({now, recordkind::ll_chunk,
                       json{{"tick", tick},
                            {"subtask", *latched},
                            {"actions", acts}}});
    for (int i = 0; i < cfg.open_loop_exec; ++i) {
      auto r = env.apply(chunk[static_cast<std::size_t>(i)]);
      records.push_back({now, recordkind::env_transition,
                         json{{"action", to_json(chunk[static_cast<std::size_t>(i)])},
                              {"illegal", r.illegal},
                              {"terminal", r.terminal},
                              {"note", r.note}}});
      if (r.terminal) {
        finish(now, true);
        return;
      }
    }
    clock.schedule(now + cfg.ll_period_ms, ll_cb);
  };

  // Registration order fixes the shared-timestamp interleaving: a frame is
  // always sampled at t=0 before the first decision, and at later shared
  // stamps the deliberator fires first, seeing the window as of one
  // observation period earlier.
  clock.schedule(0, obs_cb);
  clock.schedule(0, hl_cb);
  clock.schedule(0, ll_cb);
  while (!done && clock.step()) {
  }
  if (!done) finish(clock.now(), env.terminal());
  return out;
}

ReplayResult replay_log(const std::vector<Record>& records) {
  if (records.empty() || records.front().kind != recordkind::episode_header) {
    throw CorruptFile("log does not start with an episode header");
  }
  auto env = env_from_fixture(records.front().payload);
  ReplayResult out;
  for (const auto& rec : records) {
    if (rec.kind == recordkind::observation) {
      env->observe(rec.payload.at("index").get<FrameIndex>());
    } else if (rec.kind == recordkind::env_transition) {
      env->apply(action_from_json(rec.payload.at("action")));
      ++out.transitions;
    } else if (rec.kind == recordkind::episode_end) {
      out.logged_digest = rec.payload.at("digest").get<std::string>();
    }
  }
  out.replayed_digest = state_digest(*env);
  out.identical =
      !out.logged_digest.empty() && out.logged_digest == out.replayed_digest;
  return out;
}

}  // namespace kfm
