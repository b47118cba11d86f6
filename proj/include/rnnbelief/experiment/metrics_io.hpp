#pragma once

// Metrics CSV: env,cell,seed,episode,metric,tag,epsilon,value
// epsilon is empty for main-protocol rows. Values use the shortest decimal
// form that round-trips; failed measurements are written as nan.

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rnnbelief/experiment/protocol.hpp"
#include "rnnbelief/nn/serialize.hpp"

namespace rnnbelief::experiment {

inline constexpr const char* kMetricsHeader = "env,cell,seed,episode,metric,tag,epsilon,value";

inline std::string format_value(double v) { return std::isnan(v) ? "nan" : nn::format_double(v); }

inline std::string format_row(const MetricsRow& r) {
  std::string s = r.env + "," + r.cell + "," + std::to_string(r.seed) + "," + std::to_string(r.episode) + "," +
                  r.metric + "," + r.tag + ",";
  if (r.epsilon) s += format_value(*r.epsilon);
  return s + "," + format_value(r.value);
}

inline std::string format_metrics(const std::vector<MetricsRow>& rows, bool header = true) {
  std::string s = header ? std::string(kMetricsHeader) + "\n" : std::string();
  for (const MetricsRow& r : rows) s += format_row(r) + "\n";
  return s;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  f.push_back(cur);
  return f;
}

inline double parse_value(const std::string& s, const std::string& where) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    return nn::parse_double(s);
  } catch (const Error&) {
    throw Error(where + ": bad number '" + s + "'");
  }
}

}  // namespace detail

/// Parses a metrics CSV; the header must match exactly and columns are
/// checked against the schema.
inline std::vector<MetricsRow> parse_metrics(std::istream& in, const std::string& name = "metrics") {
  std::string line;
  if (!std::getline(in, line)) throw Error(name + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) throw Error(name + ": header must be '" + std::string(kMetricsHeader) + "'");
  std::vector<MetricsRow> rows;
  for (int lineno = 2; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto f = detail::split_csv(line);
    if (f.size() != 8) throw Error(where + ": expected 8 columns, got " + std::to_string(f.size()));
    MetricsRow r;
    r.env = f[0];
    r.cell = f[1];
    try {
      std::size_t used = 0;
      r.seed = std::stoull(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("seed");
      r.episode = std::stoi(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument("episode");
    } catch (const std::logic_error&) {
      throw Error(where + ": bad seed or episode");
    }
    r.metric = f[4];
    if (r.metric != "return" && r.metric != "mi") throw Error(where + ": unknown metric '" + r.metric + "'");
    r.tag = f[5];
    if (r.tag != "main" && r.tag != "relevant" && r.tag != "irrelevant")
      throw Error(where + ": unknown tag '" + r.tag + "'");
    if (!f[6].empty()) r.epsilon = detail::parse_value(f[6], where);
    r.value = detail::parse_value(f[7], where);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_metrics(in, path);
}

/// Seed band per (env, cell, episode, metric, tag, epsilon): count, mean,
/// min and max over seeds, NaN rows excluded.
inline std::string format_summary(const std::vector<MetricsRow>& rows) {
  struct Band {
    std::size_t n = 0;
    double sum = 0.0, lo = 0.0, hi = 0.0;
  };
  using Key = std::tuple<std::string, std::string, int, std::string, std::string, std::string>;
  std::map<Key, Band> bands;
  for (const MetricsRow& r : rows) {
    if (r.failed()) continue;
    Band& b = bands[{r.env, r.cell, r.episode, r.metric, r.tag, r.epsilon ? format_value(*r.epsilon) : ""}];
    b.lo = b.n ? std::min(b.lo, r.value) : r.value;
    b.hi = b.n ? std::max(b.hi, r.value) : r.value;
    b.sum += r.value;
    ++b.n;
  }
  std::string s = "env,cell,episode,metric,tag,epsilon,n,mean,min,max\n";
  for (const auto& [k, b] : bands) {
    const auto& [env, cell, episode, metric, tag, eps] = k;
    s += env + "," + cell + "," + std::to_string(episode) + "," + metric + "," + tag + "," + eps + "," +
         std::to_string(b.n) + "," + format_value(b.sum / static_cast<double>(b.n)) + "," + format_value(b.lo) +
         "," + format_value(b.hi) + "\n";
  }
  return s;
}

}  // namespace rnnbelief::experiment
