#include "kfm/evalmetrics.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

namespace kfm {

namespace {

void check_traces(const PredictionTrace& pred, const PredictionTrace& gt) {
  if (pred.size() != gt.size()) {
    throw LengthMismatch("trace lengths differ: " + std::to_string(pred.size()) +
                         " vs " + std::to_string(gt.size()));
  }
  if (gt.empty()) throw EmptyTrace("empty traces have no accuracy");
}

}  // namespace

double trajectory_accuracy(const PredictionTrace& pred,
                           const PredictionTrace& gt) {
  check_traces(pred, gt);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (pred[i] == gt[i]) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(gt.size());
}

double boundary_accuracy(const PredictionTrace& pred, const PredictionTrace& gt,
                         const BoundarySpec& spec) {
  if (spec.half_width < 0) throw ConfigError("half width must be >= 0");
  check_traces(pred, gt);
  auto n = static_cast<std::ptrdiff_t>(gt.size());
  std::vector<bool> in_union(gt.size(), false);
  bool any = false;
  for (std::ptrdiff_t tau = 1; tau < n; ++tau) {
    if (gt[static_cast<std::size_t>(tau)] == gt[static_cast<std::size_t>(tau - 1)]) {
      continue;
    }
    any = true;
    auto lo = std::max<std::ptrdiff_t>(0, tau - spec.half_width);
    auto hi = std::min<std::ptrdiff_t>(n - 1, tau + spec.half_width);
    for (auto i = lo; i <= hi; ++i) in_union[static_cast<std::size_t>(i)] = true;
  }
  if (!any) throw NoTransitions("ground truth never changes label");
  std::size_t covered = 0, matches = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!in_union[i]) continue;
    ++covered;
    if (pred[i] == gt[i]) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(covered);
}

nlohmann::json to_json(const ReportRow& r) {
  return nlohmann::json{{"method", r.method},
                        {"search_episodes", r.search_episodes},
                        {"counting_episodes", r.counting_episodes},
                        {"dust_episodes", r.dust_episodes},
                        {"retrieved", r.retrieved},
                        {"optimal", r.optimal},
                        {"wrong_scoops", r.wrong_scoops},
                        {"dust_bottom", r.dust_bottom},
                        {"dust_top", r.dust_top},
                        {"replace_bottom", r.replace_bottom},
                        {"replace_top", r.replace_top}};
}

std::vector<ReportRow> report(const std::vector<ScoredEpisode>& episodes) {
  std::map<std::string, ReportRow> rows;
  for (const auto& ep : episodes) {
    auto& row = rows[ep.method];
    row.method = ep.method;
    const auto& s = ep.score;
    switch (s.task) {
      case Task::search:
        ++row.search_episodes;
        row.retrieved += s.retrieved;
        row.optimal += s.optimal;
        break;
      case Task::counting:
        ++row.counting_episodes;
        row.wrong_scoops += s.wrong_scoops;
        break;
      case Task::dust:
        ++row.dust_episodes;
        row.dust_bottom += s.dusted_bottom ? 1 : 0;
        row.dust_top += s.dusted_top ? 1 : 0;
        row.replace_bottom += s.replaced_bottom ? 1 : 0;
        row.replace_top += s.replaced_top ? 1 : 0;
        break;
    }
  }
  std::vector<ReportRow> out;
  for (auto& [name, row] : rows) out.push_back(std::move(row));
  return out;
}

TracePair offline_traces(const Demonstration& demo, HlPolicy& policy,
                         const std::vector<FrameIndex>& gt_keyframes,
                         int window) {
  if (window <= 0) throw ConfigError("window must be positive");
  TracePair out;
  std::vector<std::string> history;
  for (const auto& dp : demo.decisions) {
    auto t = dp.tick;
    auto len = std::min<std::int64_t>(t + 1, window);
    HlContext ctx;
    ctx.tick = t;
    ctx.instruction = demo.frames[static_cast<std::size_t>(t)].instruction();
    for (auto i = t - len + 1; i <= t; ++i) {
      ctx.window.push_back(&demo.frames[static_cast<std::size_t>(i)]);
    }
    for (auto k : gt_keyframes) {
      if (k < t - window + 1) {
        ctx.keyframes.push_back(&demo.frames[static_cast<std::size_t>(k)]);
      }
    }
    ctx.text_memory = history;
    out.pred.push_back(policy.decide(ctx).subtask);
    out.gt.push_back(dp.subtask);
    if (history.empty() || history.back() != dp.subtask) {
      history.push_back(dp.subtask);
    }
  }
  return out;
}

std::string render_table(const std::vector<ReportRow>& rows) {
  if (rows.empty()) return "";
  std::vector<std::pair<std::string, int ReportRow::*>> cols = {
      {"retrieved", &ReportRow::retrieved},
      {"optimal", &ReportRow::optimal},
      {"wrong_scoops", &ReportRow::wrong_scoops},
      {"dust_bottom", &ReportRow::dust_bottom},
      {"dust_top", &ReportRow::dust_top},
      {"replace_bottom", &ReportRow::replace_bottom},
      {"replace_top", &ReportRow::replace_top},
  };
  std::size_t name_w = std::string("method").size();
  for (const auto& r : rows) name_w = std::max(name_w, r.method.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_w) + 2) << "method";
  for (const auto& [label, _] : cols) {
    out << std::right << std::setw(static_cast<int>(label.size()) + 2) << label;
  }
  out << "\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(name_w) + 2) << r.method;
    for (const auto& [label, member] : cols) {
      out << std::right << std::setw(static_cast<int>(label.size()) + 2)
          << r.*member;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace kfm
