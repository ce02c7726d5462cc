#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "kfm/memory.hpp"

using namespace kfm;

namespace {

// Independent clustering oracle: treat indices as graph nodes, connect every
// pair at distance <= d, and take connected components via union-find. The
// production code does a sorted linear scan; agreement over random multisets
// is the correctness argument for that shortcut.
std::vector<std::vector<FrameIndex>> brute_force_clusters(
    std::vector<FrameIndex> xs, int d) {
  std::sort(xs.begin(), xs.end());
  if (xs.empty()) return {};
  std::vector<std::size_t> parent(xs.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      if (xs[j] - xs[i] <= d) {
        parent[find(j)] = find(i);
      }
    }
  }
  std::vector<std::vector<FrameIndex>> groups(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) groups[find(i)].push_back(xs[i]);
  std::vector<std::vector<FrameIndex>> out;
  for (auto& g : groups) {
    if (!g.empty()) out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

std::vector<std::vector<FrameIndex>> members_of(const std::vector<Cluster>& cs) {
  std::vector<std::vector<FrameIndex>> out;
  out.reserve(cs.size());
  for (const auto& c : cs) out.push_back(c.members);
  return out;
}

}  // namespace

TEST_CASE("rel_to_abs maps window positions to absolute indices") {
  CHECK(rel_to_abs(10, 8, {8}) == std::vector<FrameIndex>{10});
  CHECK(rel_to_abs(10, 8, {1}) == std::vector<FrameIndex>{3});
  CHECK(rel_to_abs(10, 8, {7}) == std::vector<FrameIndex>{9});
  CHECK(rel_to_abs(2, 3, {1, 2, 3}) == std::vector<FrameIndex>{0, 1, 2});
  CHECK(rel_to_abs(10, 8, {}).empty());
  CHECK_THROWS_AS(rel_to_abs(10, 8, {0}), PositionOutOfRange);
  CHECK_THROWS_AS(rel_to_abs(10, 8, {9}), PositionOutOfRange);
  CHECK_THROWS_AS(rel_to_abs(10, 0, {1}), PositionOutOfRange);
}

TEST_CASE("newest-position nomination resolves to the tick itself") {
  for (FrameIndex tick : {0, 1, 7, 63}) {
    int window_len = static_cast<int>(std::min<FrameIndex>(8, tick + 1));
    auto abs = rel_to_abs(tick, window_len, {window_len});
    REQUIRE(abs.size() == 1);
    CHECK(abs[0] == tick);
  }
}

TEST_CASE("single_linkage groups the worked example") {
  auto cs = single_linkage({1, 3, 3, 4, 10}, 5);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].members == std::vector<FrameIndex>{1, 3, 3, 4});
  CHECK(cs[1].members == std::vector<FrameIndex>{10});
  CHECK(single_linkage({}, 5).empty());
}

TEST_CASE("single_linkage matches the transitive-closure oracle") {
  std::mt19937_64 rng(20240817);
  for (int trial = 0; trial < 400; ++trial) {
    int d = 1 + static_cast<int>(rng() % 10);
    std::size_t n = rng() % 51;
    std::vector<FrameIndex> xs(n);
    for (auto& x : xs) x = static_cast<FrameIndex>(rng() % 300);
    NominationLog log = xs;
    std::sort(log.begin(), log.end());
    CHECK(members_of(single_linkage(log, d)) == brute_force_clusters(xs, d));
  }
}

TEST_CASE("single_linkage is idempotent over its own flattening") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    int d = 1 + static_cast<int>(rng() % 10);
    std::size_t n = rng() % 40;
    NominationLog log(n);
    for (auto& x : log) x = static_cast<FrameIndex>(rng() % 200);
    std::sort(log.begin(), log.end());
    auto once = single_linkage(log, d);
    NominationLog flat;
    for (const auto& c : once) {
      flat.insert(flat.end(), c.members.begin(), c.members.end());
    }
    CHECK(members_of(single_linkage(flat, d)) == members_of(once));
  }
}

TEST_CASE("cluster_median takes the lower median") {
  CHECK(cluster_median(Cluster{{1, 3, 3, 4}, false}) == 3);
  CHECK(cluster_median(Cluster{{10}, false}) == 10);
  CHECK(cluster_median(Cluster{{2, 4}, false}) == 2);
  CHECK_THROWS_AS(cluster_median(Cluster{{}, false}), EmptyCluster);
}

TEST_CASE("a strict majority of duplicate nominations owns the median") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    int k = 1 + static_cast<int>(rng() % 9);
    int c = k / 2 + 1;  // strict majority
    FrameIndex v = static_cast<FrameIndex>(50 + rng() % 20);
    std::vector<FrameIndex> members(static_cast<std::size_t>(c), v);
    for (int i = c; i < k; ++i) {
      members.push_back(v - 3 + static_cast<FrameIndex>(rng() % 7));
    }
    std::sort(members.begin(), members.end());
    CHECK(cluster_median(Cluster{members, false}) == v);
  }
}

TEST_CASE("ingest rejects backwards ticks and future nominations") {
  KeyframeMemory mem;
  mem.ingest(NominationBatch::from_absolute(9, {1, 3}));
  CHECK_THROWS_AS(mem.ingest(NominationBatch::from_absolute(8, {5})),
                  NonMonotonicTick);
  CHECK_THROWS_AS(mem.ingest(NominationBatch::from_absolute(10, {11})),
                  PositionOutOfRange);
}

TEST_CASE("ingest with no nominations only advances the tick") {
  KeyframeMemory mem;
  mem.ingest(NominationBatch::from_absolute(9, {1, 3}));
  auto before = members_of(mem.clusters());
  auto log_before = mem.log();
  mem.ingest(NominationBatch::from_absolute(10, {}));
  CHECK(members_of(mem.clusters()) == before);
  CHECK(mem.log() == log_before);
  CHECK(mem.last_tick() == 10);
}

TEST_CASE("streamed ingest freezes exited clusters and keeps fresh ones active") {
  KeyframeMemory mem(MemoryConfig{5, 8, 8});
  mem.ingest(NominationBatch::from_absolute(9, {1, 3}));
  mem.ingest(NominationBatch::from_absolute(10, {3, 4}));
  CHECK(mem.frozen_clusters().empty());  // threshold 10-8+1-5 = -2
  mem.ingest(NominationBatch::from_absolute(20, {10}));
  // threshold 20-8+1-5 = 8 > 4: the old group can never grow again.
  REQUIRE(mem.frozen_clusters().size() == 1);
  CHECK(mem.frozen_clusters()[0].members == std::vector<FrameIndex>{1, 3, 3, 4});
  CHECK(mem.frozen_clusters()[0].frozen);
  REQUIRE(mem.active_clusters().size() == 1);
  CHECK(mem.active_clusters()[0].members == std::vector<FrameIndex>{10});
  CHECK(mem.log() == NominationLog{1, 3, 3, 4, 10});
}

TEST_CASE("selected keyframes surface only exited-window medians") {
  KeyframeMemory mem(MemoryConfig{5, 8, 8});
  mem.ingest(NominationBatch::from_absolute(9, {1, 3}));
  mem.ingest(NominationBatch::from_absolute(10, {3, 4}));
  mem.ingest(NominationBatch::from_absolute(12, {10}));
  // Window at tick 12 is [5, 12]; the group at 10 is still pending.
  CHECK(mem.selected_keyframes(12).indices == std::vector<FrameIndex>{3});
  // By tick 20 the window is [13, 20] and both medians have exited.
  CHECK(mem.selected_keyframes(20).indices == std::vector<FrameIndex>{3, 10});
}

TEST_CASE("every selected keyframe lies before the recent window") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 50; ++trial) {
    MemoryConfig cfg{1 + static_cast<int>(rng() % 10), 8, 8};
    KeyframeMemory mem(cfg);
    FrameIndex tick = 0;
    for (int step = 0; step < 120; ++step) {
      tick += static_cast<FrameIndex>(1 + rng() % 3);
      int window_len = static_cast<int>(std::min<FrameIndex>(cfg.window, tick + 1));
      std::vector<int> pos;
      for (std::size_t k = rng() % 3; k > 0; --k) {
        pos.push_back(1 + static_cast<int>(rng() % window_len));
      }
      mem.ingest(NominationBatch::from_positions(tick, window_len, pos));
      for (FrameIndex m : mem.selected_keyframes(tick).indices) {
        CHECK(m < tick - cfg.window + 1);
      }
    }
  }
}

TEST_CASE("incremental ingest equals batch recomputation over random streams") {
  std::mt19937_64 rng(1337);
  for (int trial = 0; trial < 200; ++trial) {
    MemoryConfig cfg{1 + static_cast<int>(rng() % 10), 8, 8};
    KeyframeMemory mem(cfg);
    NominationLog everything;
    FrameIndex tick = -1;
    int steps = 1 + static_cast<int>(rng() % 60);
    for (int step = 0; step < steps; ++step) {
      tick += static_cast<FrameIndex>(1 + rng() % 4);
      int window_len = static_cast<int>(std::min<FrameIndex>(cfg.window, tick + 1));
      std::vector<int> pos;
      for (std::size_t k = rng() % 4; k > 0; --k) {
        pos.push_back(1 + static_cast<int>(rng() % window_len));
      }
      auto batch = NominationBatch::from_positions(tick, window_len, pos);
      everything.insert(everything.end(), batch.abs_indices.begin(),
                        batch.abs_indices.end());
      mem.ingest(batch);
    }
    std::sort(everything.begin(), everything.end());
    CHECK(mem.log() == everything);
    CHECK(members_of(mem.clusters()) ==
          members_of(single_linkage(everything, cfg.merge_distance)));
  }
}

TEST_CASE("nomination order inside one batch does not matter") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> pos;
    for (int k = 0; k < 5; ++k) pos.push_back(1 + static_cast<int>(rng() % 8));
    std::vector<int> shuffled = pos;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    KeyframeMemory a, b;
    a.ingest(NominationBatch::from_positions(20, 8, pos));
    b.ingest(NominationBatch::from_positions(20, 8, shuffled));
    CHECK(members_of(a.clusters()) == members_of(b.clusters()));
  }
}

TEST_CASE("frozen clusters stay bit-identical for the rest of the episode") {
  std::mt19937_64 rng(31415);
  for (int trial = 0; trial < 30; ++trial) {
    KeyframeMemory mem;
    std::vector<std::vector<FrameIndex>> seen_frozen;
    FrameIndex tick = -1;
    for (int step = 0; step < 200; ++step) {
      tick += static_cast<FrameIndex>(1 + rng() % 3);
      int window_len = static_cast<int>(std::min<FrameIndex>(8, tick + 1));
      std::vector<int> pos;
      if (rng() % 2) pos.push_back(1 + static_cast<int>(rng() % window_len));
      mem.ingest(NominationBatch::from_positions(tick, window_len, pos));
      auto frozen = members_of(mem.frozen_clusters());
      REQUIRE(frozen.size() >= seen_frozen.size());
      for (std::size_t i = 0; i < seen_frozen.size(); ++i) {
        CHECK(frozen[i] == seen_frozen[i]);
      }
      seen_frozen = frozen;
    }
  }
}

TEST_CASE("enforce_cap drops the oldest overflow and reports it") {
  SelectedKeyframes nine{{1, 5, 9, 13, 17, 21, 25, 29, 33}};
  auto r = enforce_cap(nine, 8);
  CHECK(r.kept.indices == std::vector<FrameIndex>{5, 9, 13, 17, 21, 25, 29, 33});
  CHECK(r.evicted == std::vector<FrameIndex>{1});

  auto fits = enforce_cap(SelectedKeyframes{{2, 4}}, 8);
  CHECK(fits.kept.indices == std::vector<FrameIndex>{2, 4});
  CHECK(fits.evicted.empty());
  CHECK_THROWS_AS(enforce_cap(nine, 0), ConfigError);
}

TEST_CASE("repeat-nominated jittered frames consolidate onto the true frame") {
  // Generator contract: each of 5 consecutive ticks re-nominates the true
  // frame, perturbed with probability 0.25 by a nonzero uniform offset in
  // [-2, 2]. Representative must stay within +-2 always and hit exactly in
  // at least 90% of seeded trials.
  std::mt19937_64 rng(271828);
  int exact = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const FrameIndex truth = 40;
    KeyframeMemory mem;
    for (int i = 0; i < 5; ++i) {
      FrameIndex tick = truth + 2 + i;
      FrameIndex nom = truth;
      if (rng() % 100 < 25) {
        static const int offs[4] = {-2, -1, 1, 2};
        nom += offs[rng() % 4];
      }
      mem.ingest(NominationBatch::from_absolute(tick, {nom}));
    }
    auto clusters = mem.clusters();
    REQUIRE(clusters.size() == 1);
    FrameIndex rep = cluster_median(clusters[0]);
    CHECK(rep >= truth - 2);
    CHECK(rep <= truth + 2);
    if (rep == truth) ++exact;
  }
  CHECK(exact >= 900);
}
