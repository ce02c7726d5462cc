#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "kfm/evalmetrics.hpp"
#include "kfm/policies.hpp"
#include "kfm/weights.hpp"

// Single binary tying the modules into reproducible experiments. Exit codes:
// 0 success, 1 task failure, 2 usage error.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw kfm::IoFailure("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw kfm::CorruptFile(path + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) throw kfm::IoFailure("cannot write " + path.string());
  out << text;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const json& config, const std::vector<std::uint64_t>& seeds,
                    const std::vector<std::string>& outputs) {
  json manifest{{"version", kVersion},
                {"command", command},
                {"config", config},
                {"seeds", seeds},
                {"outputs", outputs}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

struct RunArgs {
  std::string task = "search";
  std::string fixture;
  std::string hl = "oracle";
  std::uint64_t seed = 0;
  int count = 1;
  std::uint64_t policy_seed = 0;
  double failure_prob = 0.0;
  int max_consecutive = 3;
  std::uint64_t failure_seed = 0;
  std::string config_path;
  std::string out_dir = "out";
};

int cmd_run(const RunArgs& args, kfm::RunConfig cfg) {
  fs::create_directories(args.out_dir);
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;
  json scores = json::array();

  auto run_one = [&](std::unique_ptr<kfm::TaskEnv> env, const std::string& stem,
                     kfm::FailureProfile fp) {
    auto hl = kfm::make_hl_policy(args.hl, args.policy_seed);
    kfm::ScriptedLl ll(cfg.chunk_len, cfg.open_loop_exec, fp);
    auto result = kfm::run_episode(*env, *hl, ll, cfg);
    auto name = "episode_" + stem + ".jsonl";
    kfm::write_records(fs::path(args.out_dir) / name, result.records);
    outputs.push_back(name);
    json row = kfm::to_json(result.final_score);
    row["seed"] = env->seed();
    row["completed"] = result.completed;
    row["obs_ticks"] = result.obs_ticks;
    row["perfect"] = result.completed && result.final_score.perfect();
    scores.push_back(row);
    std::cout << name << ": completed=" << (result.completed ? "yes" : "no")
              << " perfect="
              << ((result.completed && result.final_score.perfect()) ? "yes" : "no")
              << " frames=" << result.obs_ticks << "\n";
  };

  if (!args.fixture.empty()) {
    auto fx = load_json(args.fixture);
    kfm::FailureProfile fp;
    fp.default_prob = args.failure_prob;
    fp.max_consecutive = args.max_consecutive;
    fp.seed = args.failure_seed;
    if (fx.contains("ll_stall")) {
      fp.per_subtask[fx["ll_stall"]["subtask"].get<std::string>()] =
          fx["ll_stall"]["prob"].get<double>();
      fp.max_consecutive = fx["ll_stall"]["max_consecutive"].get<int>();
    }
    auto env = kfm::env_from_fixture(fx);
    seeds.push_back(env->seed());
    run_one(std::move(env), fs::path(args.fixture).stem().string(), fp);
  } else {
    auto task = kfm::task_from_string(args.task);
    for (int i = 0; i < args.count; ++i) {
      auto seed = args.seed + static_cast<std::uint64_t>(i);
      seeds.push_back(seed);
      kfm::FailureProfile fp;
      fp.default_prob = args.failure_prob;
      fp.max_consecutive = args.max_consecutive;
      fp.seed = args.failure_seed + seed;
      run_one(kfm::make_env(task, seed), std::to_string(seed), fp);
    }
  }
  write_text(fs::path(args.out_dir) / "scores.json", scores.dump(2) + "\n");
  outputs.push_back("scores.json");
  json manifest_cfg = kfm::to_json(cfg);
  manifest_cfg["hl"] = args.hl;
  manifest_cfg["policy_seed"] = args.policy_seed;
  manifest_cfg["failure_prob"] = args.failure_prob;
  manifest_cfg["failure_seed"] = args.failure_seed;
  manifest_cfg["max_consecutive"] = args.max_consecutive;
  if (!args.fixture.empty()) manifest_cfg["fixture"] = args.fixture;
  write_manifest(args.out_dir, "run", manifest_cfg, seeds, outputs);
  return 0;
}

struct EvalArgs {
  std::string logs_dir;
  std::string method;
  int boundary_w = 4;
  std::string offline_task;
  int offline_count = 0;
  std::string offline_hl = "oracle";
  std::uint64_t offline_seed = 0;
  std::string json_path;
};

int cmd_eval(const EvalArgs& args) {
  json out{{"version", kVersion}, {"boundary_half_width", args.boundary_w}};
  if (!args.logs_dir.empty()) {
    std::vector<kfm::ScoredEpisode> episodes;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(args.logs_dir)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      auto records = kfm::read_records(file.string());
      if (records.empty() ||
          records.front().kind != kfm::recordkind::episode_header) {
        continue;
      }
      auto method = records.front().payload.at("hl_policy").get<std::string>();
      if (!args.method.empty() && method != args.method) continue;
      for (const auto& r : records) {
        if (r.kind == kfm::recordkind::episode_end) {
          episodes.push_back(
              {method, kfm::task_score_from_json(r.payload.at("score"))});
        }
      }
    }
    auto rows = kfm::report(episodes);
    std::cout << kfm::render_table(rows);
    json jrows = json::array();
    for (const auto& r : rows) jrows.push_back(kfm::to_json(r));
    out["report"] = jrows;
    out["episodes"] = episodes.size();
  }
  if (args.offline_count > 0) {
    auto task = kfm::task_from_string(args.offline_task);
    double traj = 0.0, bound = 0.0;
    for (int i = 0; i < args.offline_count; ++i) {
      auto demo =
          kfm::generate_demo(task, args.offline_seed + static_cast<std::uint64_t>(i));
      auto gt = kfm::annotate(demo, kfm::default_rules(demo.task));
      auto policy = kfm::make_hl_policy(args.offline_hl, args.offline_seed);
      auto traces = kfm::offline_traces(demo, *policy, gt, 8);
      traj += kfm::trajectory_accuracy(traces.pred, traces.gt);
      bound += kfm::boundary_accuracy(traces.pred, traces.gt,
                                      {args.boundary_w});
    }
    traj /= args.offline_count;
    bound /= args.offline_count;
    std::cout << "offline " << args.offline_hl << " on " << args.offline_task
              << ": trajectory=" << traj << " boundary=" << bound
              << " (half width " << args.boundary_w << ", "
              << args.offline_count << " episodes)\n";
    out["offline"] = json{{"task", args.offline_task},
                          {"method", args.offline_hl},
                          {"trajectory_accuracy", traj},
                          {"boundary_accuracy", bound},
                          {"episodes", args.offline_count}};
  }
  if (!args.json_path.empty()) {
    write_text(args.json_path, out.dump(2) + "\n");
  }
  return 0;
}

struct DatagenArgs {
  std::string task;
  int count = 50;
  std::uint64_t seed = 0;
  int window = 8;
  std::string out_dir = "out";
  std::string schema_path;
};

int cmd_datagen(const DatagenArgs& args) {
  fs::create_directories(args.out_dir);
  auto task = kfm::task_from_string(args.task);
  json schema;
  if (!args.schema_path.empty()) schema = load_json(args.schema_path);
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;
  int imperfect = 0;
  for (int i = 0; i < args.count; ++i) {
    auto seed = args.seed + static_cast<std::uint64_t>(i);
    auto demo = kfm::generate_demo(task, seed);
    if (!demo.completed || !demo.score.perfect()) {
      std::cerr << "demo seed " << seed << " is not clean, skipping\n";
      ++imperfect;
      continue;
    }
    auto gt = kfm::annotate(demo, kfm::default_rules(demo.task));
    auto records = kfm::export_prompts(demo, gt, args.window);
    if (!schema.is_null()) {
      for (const auto& rec : records) {
        kfm::validate_against_schema(kfm::to_json(rec), schema);
      }
    }
    auto name = "demo_" + std::to_string(seed) + ".jsonl";
    write_text(fs::path(args.out_dir) / name, kfm::serialize_prompts(records));
    seeds.push_back(seed);
    outputs.push_back(name);
  }
  write_manifest(args.out_dir, "datagen",
                 json{{"task", args.task},
                      {"count", args.count},
                      {"window", args.window}},
                 seeds, outputs);
  std::cout << outputs.size() << " demo files in " << args.out_dir << "\n";
  return imperfect == 0 ? 0 : 1;
}

struct MergeArgs {
  std::string pre;
  std::string ft;
  double alpha = 0.8;
  std::string out;
};

int cmd_merge(const MergeArgs& args) {
  auto pre = kfm::load_weights(args.pre);
  auto ft = kfm::load_weights(args.ft);
  auto merged = kfm::merge(pre, ft, args.alpha);
  kfm::save_weights(merged, args.out);
  std::cout << "merged " << merged.size() << " entries at alpha "
            << args.alpha << " into " << args.out << "\n";
  return 0;
}

int cmd_replay(const std::string& log_path) {
  auto records = kfm::read_records(log_path);
  auto result = kfm::replay_log(records);
  if (result.identical) {
    std::cout << "identical (" << result.transitions << " transitions, digest "
              << result.replayed_digest << ")\n";
    return 0;
  }
  std::cout << "divergent: logged " << result.logged_digest << ", replayed "
            << result.replayed_digest << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"episodic memory experiment runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run scored episodes");
  run->add_option("--task", run_args.task, "search, counting or dust");
  run->add_option("--fixture", run_args.fixture, "pinned world file (overrides --task/--seed)");
  run->add_option("--hl", run_args.hl,
                  "deliberator: oracle, none, short, text or noisy:<j>");
  run->add_option("--seed", run_args.seed, "first world seed");
  run->add_option("--count", run_args.count, "number of consecutive seeds")
      ->check(CLI::PositiveNumber);
  run->add_option("--policy-seed", run_args.policy_seed, "deliberator seed");
  run->add_option("--failure-prob", run_args.failure_prob,
                  "action failure probability")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--failure-seed", run_args.failure_seed, "failure stream seed");
  run->add_option("--max-consecutive", run_args.max_consecutive,
                  "failure streak bound");
  run->add_option("--config", run_args.config_path, "run configuration JSON");
  run->add_option("--out", run_args.out_dir, "output directory");
  kfm::RunConfig flag_cfg;
  run->add_option("--window", flag_cfg.window, "recent-frame window");
  run->add_option("--merge-distance", flag_cfg.merge_distance,
                  "nomination cluster distance");
  run->add_option("--cap", flag_cfg.keyframe_cap, "kept keyframe cap");
  run->add_option("--chunk-len", flag_cfg.chunk_len, "actions per chunk");
  run->add_option("--open-loop-exec", flag_cfg.open_loop_exec,
                  "actions executed per chunk");
  run->add_option("--max-ticks", flag_cfg.max_ticks, "frame budget");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "aggregate scores and offline accuracy");
  eval->add_option("--logs", eval_args.logs_dir, "directory of episode logs");
  eval->add_option("--method", eval_args.method, "only this method's logs");
  eval->add_option("--boundary-w", eval_args.boundary_w,
                   "half width around transitions")
      ->check(CLI::NonNegativeNumber);
  eval->add_option("--offline-task", eval_args.offline_task,
                   "task for offline re-decision");
  eval->add_option("--offline-count", eval_args.offline_count,
                   "offline demos to evaluate");
  eval->add_option("--offline-hl", eval_args.offline_hl, "offline deliberator");
  eval->add_option("--offline-seed", eval_args.offline_seed, "first demo seed");
  eval->add_option("--json", eval_args.json_path, "write the report as JSON");

  DatagenArgs datagen_args;
  auto* datagen = app.add_subcommand("datagen", "export training records");
  datagen->add_option("--task", datagen_args.task, "search, counting or dust")
      ->required();
  datagen->add_option("--count", datagen_args.count, "number of demos")
      ->check(CLI::PositiveNumber);
  datagen->add_option("--seed", datagen_args.seed, "first demo seed");
  datagen->add_option("--window", datagen_args.window, "recent-frame window")
      ->check(CLI::PositiveNumber);
  datagen->add_option("--out", datagen_args.out_dir, "output directory");
  datagen->add_option("--schema", datagen_args.schema_path,
                      "validate records against this schema file");

  MergeArgs merge_args;
  auto* merge = app.add_subcommand("merge", "interpolate two weight maps");
  merge->add_option("--pre", merge_args.pre, "base weights")->required();
  merge->add_option("--ft", merge_args.ft, "adapted weights")->required();
  merge->add_option("--alpha", merge_args.alpha, "interpolation factor")
      ->check(CLI::Range(0.0, 1.0));
  merge->add_option("--out", merge_args.out, "merged output path")->required();

  std::string replay_path;
  auto* replay = app.add_subcommand("replay", "re-execute a log and compare digests");
  replay->add_option("log", replay_path, "episode log file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (run->parsed()) {
      kfm::RunConfig cfg;
      if (!run_args.config_path.empty()) {
        cfg = kfm::run_config_from_json(load_json(run_args.config_path));
      }
      if (run->count("--window")) cfg.window = flag_cfg.window;
      if (run->count("--merge-distance")) {
        cfg.merge_distance = flag_cfg.merge_distance;
      }
      if (run->count("--cap")) cfg.keyframe_cap = flag_cfg.keyframe_cap;
      if (run->count("--chunk-len")) cfg.chunk_len = flag_cfg.chunk_len;
      if (run->count("--open-loop-exec")) {
        cfg.open_loop_exec = flag_cfg.open_loop_exec;
      }
      if (run->count("--max-ticks")) cfg.max_ticks = flag_cfg.max_ticks;
      cfg.validate();
      return cmd_run(run_args, cfg);
    }
    if (eval->parsed()) return cmd_eval(eval_args);
    if (datagen->parsed()) return cmd_datagen(datagen_args);
    if (merge->parsed()) return cmd_merge(merge_args);
    if (replay->parsed()) return cmd_replay(replay_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
