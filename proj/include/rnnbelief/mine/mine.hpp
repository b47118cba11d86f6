#pragma once

// Mutual information neural estimation with the Donsker-Varadhan bound
//
//   I(X; Y) >= E_joint[T] - log E_marginal[e^T]
//
// trained by minibatch ascent. The gradient of the log term uses an
// exponential moving average of the marginal denominator (bias correction);
// reported bounds use the plain batch statistics. Everything is in nats
// internally and reported in bits.
//
// Two statistics networks: an MLP on the concatenation (x, y), and a Deep Set
// for y given as a set of M elements per sample.

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "rnnbelief/errors.hpp"
#include "rnnbelief/nn/adam.hpp"
#include "rnnbelief/nn/mlp.hpp"

namespace rnnbelief::mine {

using nn::Matrix;
using nn::Vector;

enum class Variant { vector, deepset };

struct MineConfig {
  int hidden_layers = 2;
  int width = 256;
  int epochs = 200;
  int batch_size = 1024;
  double learning_rate = 1e-3;
  int representation = 16;
  double ema_rate = 0.01;
  int samples = 10000;

  void validate() const {
    auto positive = [](double v, const char* path) {
      if (!(v > 0)) throw ConfigError(path, "must be positive");
    };
    positive(hidden_layers, "mine.hidden_layers");
    positive(width, "mine.width");
    positive(epochs, "mine.epochs");
    positive(batch_size, "mine.batch_size");
    positive(learning_rate, "mine.learning_rate");
    positive(representation, "mine.representation");
    positive(samples, "mine.samples");
    if (!(ema_rate > 0.0 && ema_rate <= 1.0)) throw ConfigError("mine.ema_rate", "must lie in (0, 1]");
  }
};

/// N pairs. x is dx x N. For the vector variant y is dy x N; for the Deep
/// Set variant y is de x (N * set_size) with sample n's set in columns
/// [n * set_size, (n + 1) * set_size).
struct Dataset {
  Matrix x;
  Matrix y;
  Eigen::Index set_size = 0;  // 0 for vector-valued y

  Eigen::Index size() const { return x.cols(); }
  Variant variant() const { return set_size == 0 ? Variant::vector : Variant::deepset; }

  void validate() const {
    if (x.cols() < 2) throw ShapeError("mine dataset needs at least two samples");
    if (set_size == 0 && y.cols() != x.cols()) throw ShapeError("mine dataset: x and y counts differ");
    if (set_size > 0 && y.cols() != x.cols() * set_size) throw ShapeError("mine dataset: ragged sets");
    if (!x.allFinite() || !y.allFinite()) throw NumericalError("mine dataset has non-finite entries");
  }
};

/// Columns idx of m, or whole sets for set-valued data.
inline Matrix gather(const Matrix& m, const std::vector<int>& idx, Eigen::Index set_size) {
  const Eigen::Index k = std::max<Eigen::Index>(set_size, 1);
  Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()) * k);
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.middleCols(static_cast<Eigen::Index>(i) * k, k) = m.middleCols(idx[i] * k, k);
  return out;
}

/// log(mean(exp(v))) without overflow.
inline double log_mean_exp(const Eigen::Ref<const Vector>& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().mean());
}

/// Plug-in DV bound in nats from statistics values on a joint and a marginal batch.
inline double dv_bound(const Eigen::Ref<const Vector>& t_joint, const Eigen::Ref<const Vector>& t_marginal) {
  if (t_joint.size() == 0 || t_marginal.size() == 0) throw ShapeError("dv_bound: empty batch");
  const double v = t_joint.mean() - log_mean_exp(t_marginal);
  if (!std::isfinite(v)) throw NumericalError("dv_bound: non-finite value");
  return v;
}

/// Independent permutations for x and y: (x^{p1(k)}, y^{p2(k)}).
struct MarginalPairing {
  std::vector<int> x_index;
  std::vector<int> y_index;
};

inline MarginalPairing make_marginal(Eigen::Index n, Rng& rng) {
  if (n < 2) throw ShapeError("make_marginal needs N >= 2");
  MarginalPairing p;
  p.x_index = random_permutation(rng, static_cast<int>(n));
  p.y_index = random_permutation(rng, static_cast<int>(n));
  return p;
}

/// Per-dimension affine standardization; MI is invariant to it.
struct Standardizer {
  Vector mean;
  Vector inv_std;

  static Standardizer fit(const Matrix& m) {
    Standardizer s;
    s.mean = m.rowwise().mean();
    s.inv_std.resize(m.rows());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double var = (m.row(r).array() - s.mean(r)).square().mean();
      s.inv_std(r) = var > 1e-24 ? 1.0 / std::sqrt(var) : 1.0;
    }
    return s;
  }

  Matrix apply(const Matrix& m) const {
    return ((m.colwise() - mean).array().colwise() * inv_std.array()).matrix();
  }
};

/// Trained statistics network T_phi.
class Statistic {
 public:
  Statistic() = default;

  Statistic(const Dataset& data, const MineConfig& cfg) : set_size_(data.set_size) {
    const int dx = static_cast<int>(data.x.rows());
    const int dy = static_cast<int>(data.y.rows());
    if (set_size_ == 0) {
      std::vector<int> sizes{dx + dy};
      for (int i = 0; i < cfg.hidden_layers; ++i) sizes.push_back(cfg.width);
      sizes.push_back(1);
      mlp_ = nn::Mlp(params_, "T.", sizes);
    } else {
      deepset_ = nn::DeepSetNet(params_, dx, dy, cfg.representation, cfg.width, cfg.hidden_layers);
    }
    sx_ = Standardizer::fit(data.x);
    sy_ = Standardizer::fit(data.y);
  }

  void initialize(Rng& rng) {
    if (set_size_ == 0)
      mlp_.initialize(params_, rng);
    else
      deepset_.initialize(params_, rng);
  }

  nn::Parameters& params() { return params_; }
  const nn::Parameters& params() const { return params_; }
  Eigen::Index set_size() const { return set_size_; }

  /// Sets the output layer to zero, so T = 0 everywhere.
  void zero_output() {
    const nn::Mlp& out = set_size_ == 0 ? mlp_ : deepset_.mu();
    params_[static_cast<std::size_t>(out.output_weight_block())].setZero();
    params_[static_cast<std::size_t>(out.output_bias_block())].setZero();
  }

  struct Tape {
    nn::MlpTape mlp;
    nn::DeepSetTape deepset;
  };

  /// T on raw (unstandardized) columns; returns a length-B vector.
  Vector evaluate(const Matrix& x, const Matrix& y, Tape* tape) const {
    const Matrix xs = sx_.apply(x);
    const Matrix ys = sy_.apply(y);
    if (set_size_ == 0) {
      Matrix in(xs.rows() + ys.rows(), xs.cols());
      in.topRows(xs.rows()) = xs;
      in.bottomRows(ys.rows()) = ys;
      return mlp_.forward(params_, in, tape ? &tape->mlp : nullptr).row(0).transpose();
    }
    return deepset_.forward(params_, xs, ys, set_size_, tape ? &tape->deepset : nullptr).row(0).transpose();
  }

  void backward(const Tape& tape, const Vector& dt, nn::Parameters& grads) const {
    const Matrix dy = dt.transpose();
    if (set_size_ == 0)
      mlp_.backward(params_, tape.mlp, dy, grads, nullptr);
    else
      deepset_.backward(params_, tape.deepset, dy, grads);
  }

 private:
  nn::Parameters params_;
  nn::Mlp mlp_;
  nn::DeepSetNet deepset_;
  Standardizer sx_;
  Standardizer sy_;
  Eigen::Index set_size_ = 0;
};

/// Moving average of the marginal batch mean of e^T, kept in log space.
class EmaDenominator {
 public:
  explicit EmaDenominator(double rate) : rate_(rate) {}

  bool initialized() const { return initialized_; }
  double value() const { return std::exp(log_value()); }
  double log_value() const {
    if (!initialized_) throw Error("EMA denominator used before its first update");
    return log_value_;
  }

  /// Folds in log(mean e^T) of one batch; the first batch initializes it.
  void update(double log_batch_mean) {
    if (!initialized_) {
      log_value_ = log_batch_mean;
      initialized_ = true;
      return;
    }
    const double a = std::log1p(-rate_) + log_value_;
    const double b = std::log(rate_) + log_batch_mean;
    const double m = std::max(a, b);
    log_value_ = m + std::log(std::exp(a - m) + std::exp(b - m));
  }

 private:
  double rate_;
  bool initialized_ = false;
  double log_value_ = 0.0;
};

struct TrainLog {
  std::vector<double> epoch_bound;  // mean batch DV bound per epoch, nats
};

struct TrainResult {
  Statistic net;
  TrainLog log;
};

/// Algorithm: per epoch, a permutation p for joint batches and independent
/// permutations p1, p2 for marginal batches; batches i = 0 .. floor(N/B)
/// (the last one partial, skipped when empty).
inline TrainResult mine_train(const Dataset& data, const MineConfig& cfg, Rng& rng) {
  cfg.validate();
  data.validate();
  TrainResult out{Statistic(data, cfg), {}};
  Statistic& net = out.net;
  net.initialize(rng);
  nn::Adam adam(net.params(), {cfg.learning_rate});
  EmaDenominator ema(cfg.ema_rate);
  nn::Parameters grads = net.params().zeros_like();
  const Eigen::Index n = data.size();
  const Eigen::Index bsz = cfg.batch_size;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> p = random_permutation(rng, static_cast<int>(n));
    const MarginalPairing q = make_marginal(n, rng);
    double bound_sum = 0.0;
    int batches = 0;
    for (Eigen::Index i = 0; i <= n / bsz; ++i) {
      const Eigen::Index lo = i * bsz;
      const Eigen::Index hi = std::min(n, lo + bsz);
      if (hi <= lo) continue;
      const std::vector<int> jb(p.begin() + lo, p.begin() + hi);
      const std::vector<int> mx(q.x_index.begin() + lo, q.x_index.begin() + hi);
      const std::vector<int> my(q.y_index.begin() + lo, q.y_index.begin() + hi);
      const auto b = static_cast<double>(hi - lo);

      Statistic::Tape tj, tm;
      const Vector t_joint = net.evaluate(gather(data.x, jb, 0), gather(data.y, jb, data.set_size), &tj);
      const Vector t_marg = net.evaluate(gather(data.x, mx, 0), gather(data.y, my, data.set_size), &tm);
      const double log_batch = log_mean_exp(t_marg);
      const double bound = t_joint.mean() - log_batch;
      if (!std::isfinite(bound)) throw NumericalError("mine: non-finite bound at epoch " + std::to_string(epoch));
      ema.update(log_batch);

      // minimize -(mean T_joint - mean e^{T_marg} / ema)
      grads.set_zero();
      net.backward(tj, Vector::Constant(t_joint.size(), -1.0 / b), grads);
      net.backward(tm, ((t_marg.array() - ema.log_value()).exp() / b).matrix(), grads);
      adam.step(net.params(), grads);
      bound_sum += bound;
      ++batches;
    }
    out.log.epoch_bound.push_back(bound_sum / batches);
  }
  return out;
}

/// DV estimate over the full dataset with one fresh marginal shuffle, in bits.
inline double mine_estimate(const Dataset& data, const Statistic& net, Rng& rng) {
  data.validate();
  const Eigen::Index n = data.size();
  const MarginalPairing q = make_marginal(n, rng);
  Vector t_joint(n), t_marg(n);
  constexpr Eigen::Index chunk = 512;  // bounds memory for large particle sets
  for (Eigen::Index lo = 0; lo < n; lo += chunk) {
    const Eigen::Index hi = std::min(n, lo + chunk);
    std::vector<int> ji, mx(q.x_index.begin() + lo, q.x_index.begin() + hi),
        my(q.y_index.begin() + lo, q.y_index.begin() + hi);
    for (Eigen::Index i = lo; i < hi; ++i) ji.push_back(static_cast<int>(i));
    t_joint.segment(lo, hi - lo) = net.evaluate(gather(data.x, ji, 0), gather(data.y, ji, data.set_size), nullptr);
    t_marg.segment(lo, hi - lo) = net.evaluate(gather(data.x, mx, 0), gather(data.y, my, data.set_size), nullptr);
  }
  return dv_bound(t_joint, t_marg) / std::numbers::ln2;
}

/// Train then estimate, with the training and estimation streams derived from one seed.
inline double estimate_mi(const Dataset& data, const MineConfig& cfg, std::uint64_t seed,
                          TrainLog* log = nullptr) {
  Rng train_rng(derive_seed(seed, {0x11}));
  Rng eval_rng(derive_seed(seed, {0x22}));
  TrainResult r = mine_train(data, cfg, train_rng);
  if (log) *log = r.log;
  return mine_estimate(data, r.net, eval_rng);
}

}  // namespace rnnbelief::mine
