// Runs every primary acceptance criterion and prints one PASS/FAIL line per
// criterion. With arguments, runs only the listed criterion numbers.
//
// Long runs keep their outputs under ./acceptance-runs so a second
// invocation resumes finished checkpoint evaluations.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include <spdlog/spdlog.h>

#include "rnnbelief/belief/discrete.hpp"
#include "rnnbelief/belief/kalman.hpp"
#include "rnnbelief/belief/particle.hpp"
#include "rnnbelief/envs/chain.hpp"
#include "rnnbelief/envs/irrelevant.hpp"
#include "rnnbelief/experiment.hpp"
#include "rnnbelief/nn/mlp.hpp"
#include "support/brute_force.hpp"
#include "support/chain_oracle.hpp"
#include "support/synthetic.hpp"
#include "support/tmaze_cases.hpp"

namespace fs = std::filesystem;
using namespace rnnbelief;
using nn::Matrix;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

const fs::path kRunRoot = fs::absolute("acceptance-runs");
constexpr double kOptimalReturn = 3.2682615;  // 4 * 0.98^10
const double kEntropyCap = std::log2(22.0);

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
  return m;
}

void randomize(nn::Parameters& p, double scale, Rng& rng) {
  for (Matrix& m : p.blocks)
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * standard_normal(rng);
}

// ---------- 1 ----------

Outcome gradient_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_where;
  const auto note = [&](double err, const std::string& where) {
    if (err > worst) {
      worst = err;
      worst_where = where;
    }
  };
  Rng rng(1);
  for (nn::CellKind cell : {nn::CellKind::lstm, nn::CellKind::gru, nn::CellKind::brc, nn::CellKind::nbrc,
                            nn::CellKind::mgu}) {
    for (int len = 1; len <= 8; ++len) {
      nn::RnnStack net({cell, 3, 4, 2, 2}, rng);
      randomize(net.params(), 0.5, rng);
      std::vector<Matrix> steps;
      for (int t = 0; t < len; ++t) steps.push_back(random_matrix(3, 2, rng));
      const std::vector<int> readout{len - 1, (len - 1) / 2};
      const Matrix target = random_matrix(2, 2, rng);
      auto loss = [&] { return 0.5 * (net.forward(steps, readout, nullptr) - target).squaredNorm(); };
      nn::RnnTape tape;
      const Matrix q = net.forward(steps, readout, &tape);
      nn::Parameters g = net.params().zeros_like();
      net.backward(tape, q - target, g);
      note(oracle::max_relative_error(g, oracle::numeric_gradient(net.params(), loss, 1e-6)),
           nn::to_string(cell) + " length " + std::to_string(len));
    }
  }
  {
    nn::Parameters p;
    nn::Mlp net(p, "f.", {5, 7, 6, 2});
    net.initialize(p, rng);
    const Matrix x = random_matrix(5, 4, rng), w = random_matrix(2, 4, rng);
    auto loss = [&] { return net.forward(p, x, nullptr).cwiseProduct(w).sum(); };
    nn::MlpTape tape;
    net.forward(p, x, &tape);
    nn::Parameters g = p.zeros_like();
    net.backward(p, tape, w, g, nullptr);
    note(oracle::max_relative_error(g, oracle::numeric_gradient(p, loss, 1e-6)), "mlp");
  }
  {
    nn::Parameters p;
    nn::DeepSetNet net(p, 3, 4, 16, 24, 2);
    net.initialize(p, rng);
    const Eigen::Index b = 3, m = 5;
    const Matrix h = random_matrix(3, b, rng), s = random_matrix(4, b * m, rng), w = random_matrix(1, b, rng);
    auto loss = [&] { return net.forward(p, h, s, m, nullptr).cwiseProduct(w).sum(); };
    nn::DeepSetTape tape;
    net.forward(p, h, s, m, &tape);
    nn::Parameters g = p.zeros_like();
    net.backward(p, tape, w, g);
    note(oracle::max_relative_error(g, oracle::numeric_gradient(p, loss, 1e-6)), "deep set");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-5 && secs < 60.0,
          fmt("max relative error %.2e (%s), %.1f s", worst, worst_where.c_str(), secs)};
}

// ---------- 2 ----------

Outcome belief_oracle() {
  const envs::TMaze maze({3, 0.3, 0.98});
  double worst = 0.0;
  const auto table = oracle::enumerate_histories(maze, 4);
  for (const auto& entry : table) {
    const double total = std::accumulate(entry.joint.begin(), entry.joint.end(), 0.0);
    const auto b = belief::filter_history(maze, entry.history).back();
    for (std::size_t s = 0; s < b.size(); ++s) worst = std::max(worst, std::abs(b[s] - entry.joint[s] / total));
  }
  const auto b = belief::filter_history(maze, oracle::stochastic_example_history()).back();
  const double p1 = b[static_cast<std::size_t>(maze.encode({envs::Layout::up, 1, 0}))];
  const double p2 = b[static_cast<std::size_t>(maze.encode({envs::Layout::up, 2, 0}))];
  const double hand = std::max(std::abs(p1 - 6.0 / 37.0), std::abs(p2 - 31.0 / 37.0));
  return {worst <= 1e-10 && hand <= 1e-10,
          fmt("%zu histories, max abs error %.2e; 6/37 and 31/37 case error %.2e", table.size(), worst, hand)};
}

// ---------- 3 ----------

Outcome particle_consistency() {
  // Start, then five Right moves all observed as Corridor on a corridor too
  // long to reach the junction: the position is spread over x = 1..5.
  const envs::TMaze maze({10, 0.3, 0.98});
  History h(maze.observation_of({envs::Layout::up, 0, 0}));
  for (int k = 0; k < 5; ++k)
    h.append(static_cast<int>(envs::TMazeAction::right), maze.observation_of({envs::Layout::up, 1, 0}));
  const auto exact = belief::filter_history(maze, h).back();
  const double spread = 1.0 - *std::max_element(exact.probs.begin(), exact.probs.end());
  double tv = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    tv += belief::total_variation(belief::particle_histogram(belief::particle_filter(maze, h, 10000, rng).back(), maze),
                                  exact.probs);
  }
  tv /= 20.0;

  auto inner = std::make_shared<const envs::TMaze>(envs::TMazeParams{3, 0.0, 0.98});
  auto aug = envs::augment_irrelevant(inner, 1);
  Rng rng(31);
  const Episode ep = rollout(*aug, [](const History&, Rng&) { return 2; }, 5, rng);
  std::vector<Eigen::VectorXd> obs;
  for (const Observation& o : ep.history.observations()) obs.push_back(Eigen::VectorXd::Constant(1, o.values[0]));
  const auto kalman = belief::kalman_irrelevant(obs);
  const auto sets = belief::particle_filter(*aug, ep.history, 100000, rng);
  double mean_err = 0.0, var_err = 0.0;
  for (std::size_t t = 0; t < sets.size(); ++t) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < sets[t].size(); ++i) {
      const double v = sets[t].particles[i].values[0];
      mean += sets[t].weights[i] * v;
      sq += sets[t].weights[i] * v * v;
    }
    const double var = sq - mean * mean;
    mean_err = std::max(mean_err, std::abs(mean - kalman[t].mean(0)) / std::max(1.0, std::abs(kalman[t].mean(0))));
    var_err = std::max(var_err, std::abs(var - kalman[t].variance(0)) / kalman[t].variance(0));
  }
  return {h.length() == 5 && spread > 0.3 && tv <= 0.05 && mean_err <= 0.02 && var_err <= 0.02,
          fmt("exact belief off its mode by %.3f; mean TV %.4f at M=1e4 over 20 seeds; Kalman mean error %.2f%%, "
              "variance error %.2f%% at M=1e5",
              spread, tv, 100 * mean_err, 100 * var_err)};
}

// ---------- 4 ----------

Outcome mine_calibration() {
  bool ok = true;
  std::string detail;
  double slowest = 0.0;
  for (double rho : {0.0, 0.5, 0.9}) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(static_cast<std::uint64_t>(1000 * rho) + 7);
    const mine::Dataset d = oracle::gaussian_pairs(rho, 10000, rng);
    const double est = mine::estimate_mi(d, mine::MineConfig{}, 99);
    const double truth = oracle::gaussian_mi_bits(rho);
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    ok = ok && std::abs(est - truth) <= 0.1;
    detail += fmt("rho=%.1f: %.4f vs %.4f; ", rho, est, truth);
  }
  Rng rng(21);
  const int n = 2000, m = 16;
  const mine::Dataset d = oracle::particle_sets(n, m, rng);
  mine::MineConfig c;
  c.width = 64;
  c.epochs = 20;
  c.batch_size = 256;
  Rng train(22);
  const mine::TrainResult r = mine::mine_train(d, c, train);
  mine::Dataset permuted = d;
  for (int i = 0; i < n; ++i) {
    const std::vector<int> p = random_permutation(rng, m);
    for (int k = 0; k < m; ++k) permuted.y.col(i * m + k) = d.y.col(i * m + p[static_cast<std::size_t>(k)]);
  }
  Rng e1(23), e2(23);
  const double diff = std::abs(mine::mine_estimate(d, r.net, e1) - mine::mine_estimate(permuted, r.net, e2));
  ok = ok && diff <= 1e-9 && slowest <= 300.0;
  detail += fmt("Deep-Set permutation change %.1e bits; slowest case %.0f s", diff, slowest);
  return {ok, detail};
}

// ---------- 5 ----------

Outcome drqn_sanity() {
  const envs::ChainMdp chain(3, 2, 0.9);
  const auto cps = drqn::drqn_run(chain, oracle::chain_config(), nn::CellKind::gru, ActionDistribution::uniform(2), 21);
  Rng rng(22);
  const auto check = oracle::check_chain(chain, cps.back().net, 50, 6, rng);
  const envs::ChainMdp single(1, 1, 0.9);
  const auto fp = drqn::drqn_run(single, oracle::fixed_point_config(), nn::CellKind::gru, ActionDistribution::uniform(1), 31);
  const double fp_err = oracle::fixed_point_error(single, fp.back().net, 5);
  return {check.greedy_optimal && check.worst_relative <= 0.05 && fp_err <= 0.005,
          fmt("chain worst relative q error %.2f%%, greedy optimal %s; fixed point error %.3f%%",
              100 * check.worst_relative, check.greedy_optimal ? "yes" : "no", 100 * fp_err)};
}

// ---------- 6, 7, 8 ----------

using Rows = std::vector<experiment::MetricsRow>;

/// value[seed][episode] for rows matching metric and tag (main protocol only).
std::map<std::uint64_t, std::map<int, double>> series(const Rows& rows, const std::string& metric, const std::string& tag) {
  std::map<std::uint64_t, std::map<int, double>> out;
  for (const auto& r : rows)
    if (!r.epsilon && r.metric == metric && r.tag == tag) out[r.seed][r.episode] = r.value;
  return out;
}

experiment::RunConfig desk_config(const std::string& name) {
  experiment::RunConfig cfg = experiment::load_config(std::string(RNNBELIEF_CONFIG_DIR) + "/" + name);
  cfg.output_dir = (kRunRoot / fs::path(name).stem()).string();
  return cfg;
}

Rows train_desk(const experiment::RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  return experiment::run_train(cfg, cfg.output_dir, 1);
}

Outcome desk_reproduction() {
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = desk_config("desk-tmaze-L10.json");
  const Rows rows = train_desk(cfg);
  const auto ret = series(rows, "return", "main");
  const auto mi = series(rows, "mi", "main");
  int near_optimal = 0, rising = 0;
  double max_mi = -INFINITY;
  bool any_nan = false;
  std::string finals;
  std::vector<double> all_mi, all_ret;
  for (const auto& [seed, by_episode] : mi) {
    const double final_ret = ret.at(seed).rbegin()->second;
    if (std::abs(final_ret - kOptimalReturn) <= 0.02 * kOptimalReturn) ++near_optimal;
    if (by_episode.rbegin()->second > by_episode.begin()->second) ++rising;
    for (const auto& [e, v] : by_episode) {
      if (std::isnan(v)) any_nan = true;
      max_mi = std::max(max_mi, v);
      all_mi.push_back(v);
      all_ret.push_back(ret.at(seed).at(e));
    }
    finals += fmt(" %.3f/%.2f->%.2f", final_ret, by_episode.begin()->second, by_episode.rbegin()->second);
  }
  double rs = NAN;
  try {
    rs = experiment::spearman(all_mi, all_ret);
  } catch (const Error&) {
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = near_optimal >= 3 && rising >= 3 && !any_nan && max_mi <= kEntropyCap + 0.3 && rs > 0.3;
  return {ok, fmt("final return within 2%% in %d/4 seeds; I rises in %d/4; max I %.3f (cap %.3f); pooled Spearman "
                  "%.3f over %zu checkpoints; %.0f s; per seed return/I0->IE:%s",
                  near_optimal, rising, max_mi, kEntropyCap + 0.3, rs, all_mi.size(), secs, finals.c_str())};
}

Outcome relevance_split() {
  const auto cfg = desk_config("desk-tmaze-L10-irrelevant.json");
  const Rows rows = train_desk(cfg);
  const auto rel = series(rows, "mi", "relevant");
  const auto irr = series(rows, "mi", "irrelevant");
  int both = 0;
  std::string detail;
  for (const auto& [seed, r] : rel) {
    const auto& i = irr.at(seed);
    const double r0 = r.begin()->second, r1 = r.rbegin()->second;
    const double i0 = i.begin()->second, i1 = i.rbegin()->second;
    if (r1 > r0 && i1 < i0) ++both;
    detail += fmt(" seed %llu rel %.2f->%.2f irr %.2f->%.2f;", static_cast<unsigned long long>(seed), r0, r1, i0, i1);
  }
  return {both >= 3, fmt("relevant rises and irrelevant falls in %d/4 seeds:", both) + detail};
}

Outcome generalization() {
  auto cfg = desk_config("desk-tmaze-L10.json");
  train_desk(cfg);  // reuses the criterion 6 run when present
  const Rows rows = experiment::run_sweep(cfg, cfg.output_dir, 1);
  std::map<double, std::vector<double>> by_eps;
  for (const auto& r : rows) by_eps[*r.epsilon].push_back(r.value);
  std::vector<double> eps, mean;
  std::string detail;
  for (const auto& [e, vs] : by_eps) {
    eps.push_back(e);
    mean.push_back(std::accumulate(vs.begin(), vs.end(), 0.0) / static_cast<double>(vs.size()));
    detail += fmt(" %.1f:%.3f", e, mean.back());
  }
  double rs = NAN;
  try {
    rs = experiment::spearman(eps, mean);
  } catch (const Error&) {
  }
  const double i0 = mean.front(), i1 = mean.back();
  const bool ok = eps.size() == 6 && i1 > 0.0 && i0 - i1 >= 0.0 && rs <= 0.0;
  return {ok, fmt("seed-mean I(eps=1) %.3f, I(eps=0) %.3f, Spearman(eps, I) %.3f; by eps:", i1, i0, rs) + detail};
}

// ---------- 9 ----------

Outcome determinism() {
  const fs::path root = kRunRoot / "determinism";
  fs::remove_all(root);
  const std::string config = std::string(RNNBELIEF_CONFIG_DIR) + "/determinism.json";
  std::string outputs[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path out = root / ("run" + std::to_string(k));
    for (const char* sub : {"train", "sweep-generalization"}) {
      const std::string cmd = std::string("'") + RNNBELIEF_CLI_PATH + "' --log-level warn " + sub + " --config '" +
                              config + "' --out '" + out.string() + "'";
      if (std::system(cmd.c_str()) != 0) return {false, std::string(sub) + " failed"};
    }
    auto meta = experiment::Json::parse(experiment::read_file(out / "run.json"));
    meta["config"].erase("output_dir");
    outputs[k] = experiment::read_file(out / "metrics.csv") + experiment::read_file(out / "generalization.csv") +
                 meta.dump(2);
  }
  const auto lines = std::count(outputs[0].begin(), outputs[0].end(), '\n');
  return {outputs[0] == outputs[1] && lines > 10,
          fmt("two runs %s byte for byte (%zu bytes, hash %s)", outputs[0] == outputs[1] ? "agree" : "differ",
              outputs[0].size(), experiment::git_blob_hash(outputs[0]).substr(0, 12).c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient fidelity", gradient_fidelity},      {"belief filter oracle", belief_oracle},
      {"particle filter consistency", particle_consistency}, {"MINE calibration", mine_calibration},
      {"DRQN sanity", drqn_sanity},                  {"desk-scale T-Maze reproduction", desk_reproduction},
      {"relevance split", relevance_split},          {"generalization sweep", generalization},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
