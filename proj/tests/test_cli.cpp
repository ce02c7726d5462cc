#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kfm/evalmetrics.hpp"
#include "kfm/weights.hpp"

// End-to-end checks through the installed binary: every subcommand is driven
// as a subprocess, so argument parsing, exit codes and on-disk artifacts are
// exercised exactly as a user would hit them.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_root() {
  static fs::path root = [] {
    auto p = fs::temp_directory_path() /
             ("kfm_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path fresh_dir(const std::string& name) {
  auto p = scratch_root() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

CmdResult run_cli(const std::string& args, const fs::path& dir) {
  auto out_file = dir / "stdout.txt";
  auto err_file = dir / "stderr.txt";
  std::string cmd = std::string(KFM_CLI_PATH) + " " + args + " > " +
                    out_file.string() + " 2> " + err_file.string();
  int raw = std::system(cmd.c_str());
  CmdResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  return result;
}

}  // namespace

TEST_CASE("run writes parseable logs, scores and a manifest") {
  auto dir = fresh_dir("run_basic");
  auto out = (dir / "out").string();
  auto r = run_cli("run --task counting --seed 5 --count 2 --out " + out, dir);
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);

  for (auto seed : {5, 6}) {
    auto log = fs::path(out) / ("episode_" + std::to_string(seed) + ".jsonl");
    REQUIRE(fs::exists(log));
    auto records = kfm::read_records(log.string());
    REQUIRE(!records.empty());
    CHECK(records.front().kind == kfm::recordkind::episode_header);
    CHECK(records.front().payload.at("seed").get<std::uint64_t>() ==
          static_cast<std::uint64_t>(seed));
    CHECK(records.back().kind == kfm::recordkind::episode_end);
    CHECK(records.back().payload.at("completed").get<bool>());
  }

  auto scores = json::parse(slurp(fs::path(out) / "scores.json"));
  REQUIRE(scores.is_array());
  REQUIRE(scores.size() == 2);
  for (const auto& row : scores) {
    CHECK(row.at("perfect").get<bool>());
  }

  auto manifest = json::parse(slurp(fs::path(out) / "manifest.json"));
  CHECK(manifest.at("command") == "run");
  CHECK(manifest.at("version") == "0.1.0");
  CHECK(manifest.at("seeds") == json::array({5, 6}));
  CHECK(manifest.at("config").at("window") == 8);
  auto outputs = manifest.at("outputs");
  CHECK(outputs.size() == 3);  // two logs and scores.json
}

TEST_CASE("same seed twice produces byte-identical logs") {
  auto dir = fresh_dir("run_repeat");
  auto a = (dir / "a").string();
  auto b = (dir / "b").string();
  std::string common = "run --task dust --seed 21 --hl noisy:2 --policy-seed 9 "
                       "--failure-prob 0.1 --failure-seed 4 --out ";
  REQUIRE(run_cli(common + a, dir).exit_code == 0);
  REQUIRE(run_cli(common + b, dir).exit_code == 0);
  CHECK(slurp(fs::path(a) / "episode_21.jsonl") ==
        slurp(fs::path(b) / "episode_21.jsonl"));
  CHECK(slurp(fs::path(a) / "scores.json") == slurp(fs::path(b) / "scores.json"));
}

TEST_CASE("replay confirms an untouched log and flags a tampered one") {
  auto dir = fresh_dir("replay");
  auto out = (dir / "out").string();
  REQUIRE(run_cli("run --task search --seed 2 --out " + out, dir).exit_code == 0);
  auto log = fs::path(out) / "episode_2.jsonl";

  auto ok = run_cli("replay " + log.string(), dir);
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("identical") != std::string::npos);

  // neuter one grasp and the state digest comparison must fail
  auto records = kfm::read_records(log.string());
  bool tampered = false;
  for (auto& rec : records) {
    if (!tampered && rec.kind == kfm::recordkind::env_transition &&
        rec.payload.at("action").at("kind") == "grasp") {
      rec.payload["action"]["kind"] = "hold";
      tampered = true;
    }
  }
  REQUIRE(tampered);
  auto bad_log = dir / "tampered.jsonl";
  kfm::write_records(bad_log.string(), records);
  auto bad = run_cli("replay " + bad_log.string(), dir);
  CHECK(bad.exit_code == 1);
  CHECK(bad.out.find("divergent") != std::string::npos);
}

TEST_CASE("usage errors exit 2, help and version exit 0") {
  auto dir = fresh_dir("usage");
  CHECK(run_cli("", dir).exit_code == 2);
  CHECK(run_cli("frobnicate", dir).exit_code == 2);
  CHECK(run_cli("run --no-such-flag", dir).exit_code == 2);
  CHECK(run_cli("merge --pre a.wmap", dir).exit_code == 2);  // missing required
  auto help = run_cli("--help", dir);
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("run") != std::string::npos);
  CHECK(help.out.find("replay") != std::string::npos);
  auto version = run_cli("--version", dir);
  CHECK(version.exit_code == 0);
  CHECK(version.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("runtime failures exit 1 with a message on stderr") {
  auto dir = fresh_dir("failures");
  auto missing = run_cli("replay " + (dir / "nope.jsonl").string(), dir);
  CHECK(missing.exit_code == 1);
  CHECK(!missing.err.empty());

  std::ofstream(dir / "garbage.json") << "{not json";
  auto bad_cfg = run_cli("run --task search --config " +
                             (dir / "garbage.json").string() + " --out " +
                             (dir / "out").string(),
                         dir);
  CHECK(bad_cfg.exit_code == 1);
  CHECK(bad_cfg.err.find("error:") != std::string::npos);

  auto bad_task = run_cli("run --task juggling --out " + (dir / "o2").string(), dir);
  CHECK(bad_task.exit_code == 1);
}

TEST_CASE("merge blends weight maps through the binary") {
  auto dir = fresh_dir("merge");
  kfm::WeightMap pre{{"layer.a", {1.0f, 2.0f, 3.0f}}, {"layer.b", {0.0f}}};
  kfm::WeightMap ft{{"layer.a", {5.0f, 6.0f, 7.0f}}, {"layer.b", {8.0f}}};
  kfm::save_weights(pre, (dir / "pre.wmap").string());
  kfm::save_weights(ft, (dir / "ft.wmap").string());

  auto r = run_cli("merge --pre " + (dir / "pre.wmap").string() + " --ft " +
                       (dir / "ft.wmap").string() + " --alpha 0.25 --out " +
                       (dir / "merged.wmap").string(),
                   dir);
  REQUIRE(r.exit_code == 0);
  auto merged = kfm::load_weights((dir / "merged.wmap").string());
  REQUIRE(merged.count("layer.a") == 1);
  CHECK(merged["layer.a"][0] == doctest::Approx(2.0));  // 0.75*1 + 0.25*5
  CHECK(merged["layer.a"][2] == doctest::Approx(4.0));
  CHECK(merged["layer.b"][0] == doctest::Approx(2.0));

  auto out_of_range = run_cli("merge --pre " + (dir / "pre.wmap").string() +
                                  " --ft " + (dir / "ft.wmap").string() +
                                  " --alpha 1.5 --out " + (dir / "x.wmap").string(),
                              dir);
  CHECK(out_of_range.exit_code == 2);  // rejected at parse time
}

TEST_CASE("datagen emits schema-valid training records") {
  auto dir = fresh_dir("datagen");
  auto out = (dir / "out").string();
  auto schema_path = std::string(KFM_SCHEMA_DIR) + "/prompt_record.schema.json";
  auto r = run_cli("datagen --task search --count 3 --seed 40 --schema " +
                       schema_path + " --out " + out,
                   dir);
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);

  auto schema = json::parse(slurp(schema_path));
  int records_seen = 0;
  for (auto seed : {40, 41, 42}) {
    auto path = fs::path(out) / ("demo_" + std::to_string(seed) + ".jsonl");
    REQUIRE(fs::exists(path));
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      auto rec = kfm::prompt_record_from_json(json::parse(line));
      kfm::validate_against_schema(kfm::to_json(rec), schema);
      ++records_seen;
    }
  }
  CHECK(records_seen > 30);

  auto manifest = json::parse(slurp(fs::path(out) / "manifest.json"));
  CHECK(manifest.at("command") == "datagen");
  CHECK(manifest.at("outputs").size() == 3);
}

TEST_CASE("eval aggregates run outputs into the method table") {
  auto dir = fresh_dir("eval");
  auto logs = (dir / "logs").string();
  // disjoint seed ranges so the second run cannot clobber the first's logs
  REQUIRE(run_cli("run --task search --seed 0 --count 3 --out " + logs, dir)
              .exit_code == 0);
  REQUIRE(run_cli("run --task search --seed 10 --count 2 --hl none --out " + logs,
                  dir)
              .exit_code == 0);

  auto r = run_cli("eval --logs " + logs + " --json " +
                       (dir / "report.json").string(),
                   dir);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("method") != std::string::npos);
  CHECK(r.out.find("oracle") != std::string::npos);
  CHECK(r.out.find("none") != std::string::npos);

  auto report = json::parse(slurp(dir / "report.json"));
  REQUIRE(report.at("report").size() == 2);
  // rows are sorted by method name
  CHECK(report["report"][0]["method"] == "none");
  CHECK(report["report"][1]["method"] == "oracle");
  CHECK(report["report"][1]["search_episodes"] == 3);
  CHECK(report["report"][1]["retrieved"] == 9);
  CHECK(report["report"][1]["optimal"] == 9);
  CHECK(report["report"][0]["search_episodes"] == 2);
  // memoryless search may luck into some items but never a perfect sweep
  CHECK(report["report"][0]["retrieved"].get<int>() < 6);
  CHECK(report["report"][0]["optimal"].get<int>() <
        report["report"][1]["optimal"].get<int>());

  auto filtered = run_cli("eval --logs " + logs + " --method oracle", dir);
  REQUIRE(filtered.exit_code == 0);
  CHECK(filtered.out.find("oracle") != std::string::npos);
  CHECK(filtered.out.find("none") == std::string::npos);
}

TEST_CASE("eval offline re-decision matches the library metrics") {
  auto dir = fresh_dir("eval_offline");
  auto r = run_cli(
      "eval --offline-task search --offline-count 2 --offline-hl oracle "
      "--offline-seed 7 --json " +
          (dir / "report.json").string(),
      dir);
  REQUIRE(r.exit_code == 0);
  auto report = json::parse(slurp(dir / "report.json"));
  CHECK(report.at("offline").at("trajectory_accuracy").get<double>() ==
        doctest::Approx(1.0));
  CHECK(report.at("offline").at("boundary_accuracy").get<double>() ==
        doctest::Approx(1.0));

  auto none = run_cli(
      "eval --offline-task search --offline-count 2 --offline-hl none "
      "--offline-seed 7 --json " +
          (dir / "none.json").string(),
      dir);
  REQUIRE(none.exit_code == 0);
  auto none_report = json::parse(slurp(dir / "none.json"));
  CHECK(none_report.at("offline").at("trajectory_accuracy").get<double>() < 1.0);
}

TEST_CASE("run on a pinned world fixture honours its stall profile") {
  auto dir = fresh_dir("fixture_run");
  auto fixture = std::string(KFM_FIXTURE_DIR) + "/adversarial_counting.json";
  auto out = (dir / "out").string();
  auto r = run_cli("run --fixture " + fixture + " --hl oracle --out " + out, dir);
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("perfect=yes") != std::string::npos);
  auto manifest = json::parse(slurp(fs::path(out) / "manifest.json"));
  CHECK(manifest.at("config").at("fixture").get<std::string>() == fixture);
}
