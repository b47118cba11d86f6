#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "rnnbelief/errors.hpp"
#include "rnnbelief/experiment/protocol.hpp"

namespace rnnbelief::experiment {

inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ShapeError("pearson: series lengths differ");
  if (xs.size() < 2) throw UndefinedCorrelationError("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("pearson: constant series");
  return sxy / std::sqrt(sxx * syy);
}

/// 1-based fractional ranks; tied values share the average of their ranks.
inline std::vector<double> fractional_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ShapeError("spearman: series lengths differ");
  return pearson(fractional_ranks(xs), fractional_ranks(ys));
}

struct CorrelationEntry {
  std::string env;
  std::string cell;  // "aggregated" for the pooled row
  std::size_t n = 0;
  double pearson = 0.0;
  double spearman = 0.0;
};

/// Pairs each checkpoint's return with its main-protocol MI (tag main, or
/// relevant for runs with irrelevant variables) and correlates them per
/// (env, cell) and pooled over cells. Sweep rows and NaN values are ignored;
/// keys with too few points or constant series are skipped with a warning.
inline std::vector<CorrelationEntry> correlation_report(const std::vector<MetricsRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::uint64_t, int>;
  std::map<Key, std::pair<std::optional<double>, std::optional<double>>> paired;
  for (const MetricsRow& r : rows) {
    if (r.epsilon || r.failed()) continue;
    auto& slot = paired[{r.env, r.cell, r.seed, r.episode}];
    if (r.metric == "return") slot.first = r.value;
    else if (r.metric == "mi" && (r.tag == "main" || r.tag == "relevant")) slot.second = r.value;
  }
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> series;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> pooled;
  for (const auto& [k, v] : paired) {
    if (!v.first || !v.second) continue;
    auto& s = series[{std::get<0>(k), std::get<1>(k)}];
    s.first.push_back(*v.second);
    s.second.push_back(*v.first);
    auto& p = pooled[std::get<0>(k)];
    p.first.push_back(*v.second);
    p.second.push_back(*v.first);
  }
  std::vector<CorrelationEntry> out;
  const auto add = [&](const std::string& env, const std::string& cell, const std::vector<double>& mi,
                       const std::vector<double>& ret) {
    try {
      out.push_back({env, cell, mi.size(), pearson(mi, ret), spearman(mi, ret)});
    } catch (const UndefinedCorrelationError& e) {
      spdlog::warn("correlation for {}/{} omitted: {}", env, cell, e.what());
    }
  };
  for (const auto& [k, s] : series) add(k.first, k.second, s.first, s.second);
  for (const auto& [env, p] : pooled) add(env, "aggregated", p.first, p.second);
  std::stable_sort(out.begin(), out.end(), [](const CorrelationEntry& a, const CorrelationEntry& b) {
    return a.env < b.env;
  });
  return out;
}

inline std::string format_correlations(const std::vector<CorrelationEntry>& table) {
  std::string s = "env,cell,n,pearson,spearman\n";
  char buf[64];
  for (const CorrelationEntry& e : table) {
    std::snprintf(buf, sizeof(buf), ",%zu,%.6f,%.6f\n", e.n, e.pearson, e.spearman);
    s += e.env + "," + e.cell + buf;
  }
  return s;
}

}  // namespace rnnbelief::experiment
