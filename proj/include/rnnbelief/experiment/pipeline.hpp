#pragma once

// Run directory layout:
//
//   <out>/run.json                       resolved config, config hash, output hashes
//   <out>/metrics.csv                    train: return and MI rows of every checkpoint
//   <out>/mi.csv                         eval-mi: MI rows recomputed from stored checkpoints
//   <out>/generalization.csv             sweep-generalization: per-epsilon MI of final checkpoints
//   <out>/jobs/<cell>-seed<s>/job.json   hash of the job's configuration
//   <out>/jobs/<cell>-seed<s>/checkpoints/ep<e>.txt
//   <out>/jobs/<cell>-seed<s>/rows/ep<e>.csv     finished evaluations, reused on resume
//   <out>/jobs/<cell>-seed<s>/samples/ep<e>.bin  when evaluation.save_samples is set
//
// A job directory whose job.json hash differs from the current config is
// cleared before the job starts.

#include <atomic>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "rnnbelief/experiment/metadata.hpp"
#include "rnnbelief/experiment/metrics_io.hpp"
#include "rnnbelief/experiment/sample_io.hpp"
#include "rnnbelief/nn/serialize.hpp"

namespace rnnbelief::experiment {

namespace fs = std::filesystem;

/// Configuration that determines one job's outputs.
inline Json job_config_json(const RunConfig& cfg, std::uint64_t seed) {
  Json j = config_to_json(cfg);
  j.erase("output_dir");
  j["seeds"] = Json::array({seed});
  j["evaluation"].erase("epsilons");
  return j;
}

inline std::string config_hash(const Json& j) { return git_blob_hash(j.dump(2) + "\n"); }

inline fs::path job_dir(const RunConfig& cfg, const fs::path& root, std::uint64_t seed) {
  return root / "jobs" / (nn::to_string(cfg.cell) + "-seed" + std::to_string(seed));
}

inline std::string episode_stem(int episode) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ep%06d", episode);
  return buf;
}

/// Runs fn(i) for i in [0, n) on at most `workers` threads and returns the
/// results in index order. The first exception is rethrown after all
/// threads finish.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int workers, F&& fn) {
  std::vector<T> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

/// Creates or validates the job directory against the job config hash.
inline fs::path prepare_job(const RunConfig& cfg, const fs::path& root, std::uint64_t seed) {
  const fs::path dir = job_dir(cfg, root, seed);
  const Json j = job_config_json(cfg, seed);
  const std::string hash = config_hash(j);
  const fs::path meta = dir / "job.json";
  if (fs::exists(meta)) {
    std::string stored;
    try {
      stored = Json::parse(read_file(meta)).value("config_hash", "");
    } catch (const Json::exception&) {
    }
    if (stored == hash) return dir;
    spdlog::info("job {} has a different configuration, starting over", dir.string());
    fs::remove_all(dir);
  }
  write_file_atomic(meta, Json{{"config_hash", hash}, {"config", j}}.dump(2) + "\n");
  return dir;
}

/// Trains one seed and evaluates each checkpoint, reusing finished evaluations.
inline std::vector<MetricsRow> train_job(const RunConfig& cfg, const fs::path& root, std::uint64_t seed) {
  const fs::path dir = prepare_job(cfg, root, seed);
  const Environment env = make_environment(cfg.environment);
  std::vector<MetricsRow> rows;
  drqn::drqn_train(*env.model, cfg.resolved_drqn(), cfg.cell, env.exploration, seed, [&](const drqn::Checkpoint& cp) {
    const std::string stem = episode_stem(cp.episode);
    std::ostringstream net;
    nn::write_rnn(net, cp.net);
    write_file_atomic(dir / "checkpoints" / (stem + ".txt"), net.str());
    const fs::path cached = dir / "rows" / (stem + ".csv");
    std::vector<MetricsRow> part;
    if (fs::exists(cached)) {
      std::istringstream in(read_file(cached));
      part = parse_metrics(in, cached.string());
      spdlog::info("seed {} episode {}: reusing stored evaluation", seed, cp.episode);
    } else {
      SampleSet samples;
      EvalContext ctx{cfg, env, seed, cfg.evaluation.save_samples ? &samples : nullptr};
      part = evaluate_checkpoint(ctx, cp);
      if (cfg.evaluation.save_samples && samples.size() > 0) {
        std::ostringstream bin(std::ios::binary);
        write_samples(bin, samples);
        write_file_atomic(dir / "samples" / (stem + ".bin"), bin.str());
      }
      write_file_atomic(cached, format_metrics(part));
      spdlog::info("seed {} episode {}: {}", seed, cp.episode, part.empty() ? "" : format_row(part.back()));
    }
    rows.insert(rows.end(), part.begin(), part.end());
  });
  return rows;
}

/// Stored checkpoints of one job in episode order.
inline std::vector<drqn::Checkpoint> load_checkpoints(const fs::path& dir) {
  std::vector<std::pair<int, fs::path>> files;
  const fs::path cdir = dir / "checkpoints";
  if (fs::is_directory(cdir)) {
    for (const auto& entry : fs::directory_iterator(cdir)) {
      const std::string name = entry.path().filename().string();
      if (name.size() == 12 && name.starts_with("ep") && name.ends_with(".txt"))
        files.emplace_back(std::stoi(name.substr(2, 6)), entry.path());
    }
  }
  if (files.empty()) throw Error("no checkpoints under '" + cdir.string() + "'; run train first");
  std::sort(files.begin(), files.end());
  std::vector<drqn::Checkpoint> out;
  for (const auto& [e, p] : files) out.push_back({e, nn::load_rnn(p.string())});
  return out;
}

inline std::vector<MetricsRow> flatten(const std::vector<std::vector<MetricsRow>>& parts) {
  std::vector<MetricsRow> rows;
  for (const auto& p : parts) rows.insert(rows.end(), p.begin(), p.end());
  return rows;
}

/// Writes `name` under root and records its hash in run.json.
inline void publish(const RunConfig& cfg, const fs::path& root, const std::string& name, const std::string& content) {
  write_file_atomic(root / name, content);
  const Json resolved = resolved_config_json(cfg);
  Json hashed = resolved;
  hashed.erase("output_dir");  // where a run is written does not change what it computes
  const std::string hash = config_hash(hashed);
  Json meta;
  const fs::path meta_path = root / "run.json";
  if (fs::exists(meta_path)) {
    try {
      meta = Json::parse(read_file(meta_path));
    } catch (const Json::exception&) {
      meta = Json();
    }
  }
  if (!meta.is_object() || meta.value("config_hash", "") != hash)
    meta = Json{{"config", resolved}, {"config_hash", hash}, {"outputs", Json::object()}};
  meta["outputs"][name] = git_blob_hash(content);
  write_file_atomic(meta_path, meta.dump(2) + "\n");
}

inline std::vector<MetricsRow> run_train(const RunConfig& cfg, const fs::path& root, int workers) {
  cfg.validate();
  const auto parts = parallel_map<std::vector<MetricsRow>>(
      cfg.seeds.size(), workers, [&](std::size_t i) { return train_job(cfg, root, cfg.seeds[i]); });
  auto rows = flatten(parts);
  publish(cfg, root, "metrics.csv", format_metrics(rows));
  return rows;
}

inline std::vector<MetricsRow> run_eval_mi(const RunConfig& cfg, const fs::path& root, int workers) {
  cfg.validate();
  const Environment env = make_environment(cfg.environment);
  const auto parts = parallel_map<std::vector<MetricsRow>>(cfg.seeds.size(), workers, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    std::vector<MetricsRow> rows;
    for (const drqn::Checkpoint& cp : load_checkpoints(job_dir(cfg, root, seed))) {
      EvalContext ctx{cfg, env, seed};
      for (MetricsRow& r : evaluate_checkpoint(ctx, cp, false)) rows.push_back(std::move(r));
    }
    return rows;
  });
  auto rows = flatten(parts);
  publish(cfg, root, "mi.csv", format_metrics(rows));
  return rows;
}

inline std::vector<MetricsRow> run_sweep(const RunConfig& cfg, const fs::path& root, int workers) {
  cfg.validate();
  const Environment env = make_environment(cfg.environment);
  const auto parts = parallel_map<std::vector<MetricsRow>>(cfg.seeds.size(), workers, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    const auto cps = load_checkpoints(job_dir(cfg, root, seed));
    EvalContext ctx{cfg, env, seed};
    return generalization_sweep(ctx, cps.back());
  });
  auto rows = flatten(parts);
  publish(cfg, root, "generalization.csv", format_metrics(rows));
  return rows;
}

}  // namespace rnnbelief::experiment
