#pragma once

// Feed-forward networks with rectifier hidden units and a linear output, and
// the Deep-Set statistics network T(h, S) = mu(h, rho(sum_{s in S} psi(s))).
// Networks are layouts over blocks of a Parameters object so several of them
// can share one optimizer state.

#include <vector>

#include "rnnbelief/nn/params.hpp"

namespace rnnbelief::nn {

struct MlpTape {
  std::vector<Matrix> inputs;  // input of each linear layer
  std::vector<Matrix> pre;     // pre-activation of each hidden layer
};

class Mlp {
 public:
  Mlp() = default;

  /// sizes = {input, hidden..., output}
  Mlp(Parameters& p, const std::string& prefix, std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw ConfigError("mlp", "needs at least input and output sizes");
    for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
      weights_.push_back(p.add(prefix + "W" + std::to_string(i), sizes_[i + 1], sizes_[i]));
      biases_.push_back(p.add(prefix + "b" + std::to_string(i), sizes_[i + 1], 1));
    }
  }

  void initialize(Parameters& p, Rng& rng) const {
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[i]));
      fill_uniform(p[static_cast<std::size_t>(weights_[i])], bound, rng);
      fill_uniform(p[static_cast<std::size_t>(biases_[i])], bound, rng);
    }
  }

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  int output_weight_block() const { return weights_.back(); }
  int output_bias_block() const { return biases_.back(); }

  Matrix forward(const Parameters& p, const Matrix& x, MlpTape* tape) const {
    if (x.rows() != input_size()) throw ShapeError("mlp input size mismatch");
    if (tape) {
      tape->inputs.clear();
      tape->pre.clear();
    }
    Matrix a = x;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      Matrix z = p[static_cast<std::size_t>(weights_[i])] * a;
      z.colwise() += p[static_cast<std::size_t>(biases_[i])].col(0);
      if (tape) tape->inputs.push_back(std::move(a));
      if (i + 1 < weights_.size()) {
        a = z.cwiseMax(0.0);
        if (tape) tape->pre.push_back(std::move(z));
      } else {
        a = std::move(z);
      }
    }
    return a;
  }

  /// Accumulates parameter gradients for dL/dy; optionally returns dL/dx.
  void backward(const Parameters& p, const MlpTape& tape, const Matrix& dy, Parameters& g,
                Matrix* dx) const {
    Matrix d = dy;
    for (int i = static_cast<int>(weights_.size()) - 1; i >= 0; --i) {
      const auto iu = static_cast<std::size_t>(i);
      const auto w = static_cast<std::size_t>(weights_[iu]);
      g[w].noalias() += d * tape.inputs[iu].transpose();
      g[static_cast<std::size_t>(biases_[iu])].col(0) += d.rowwise().sum();
      if (i == 0 && !dx) break;
      Matrix din = p[w].transpose() * d;
      if (i > 0) din.array() *= (tape.pre[iu - 1].array() > 0.0).cast<double>();
      d = std::move(din);
    }
    if (dx) *dx = std::move(d);
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> weights_;
  std::vector<int> biases_;
};

struct DeepSetTape {
  MlpTape psi;
  MlpTape rho;
  MlpTape mu;
  Eigen::Index set_size = 0;
};

/// Statistics network over (vector, set of vectors). Sets are stored as
/// consecutive column groups of equal size.
class DeepSetNet {
 public:
  DeepSetNet() = default;

  DeepSetNet(Parameters& p, int vector_size, int element_size, int representation, int width,
             int hidden_layers) {
    std::vector<int> psi{element_size};
    std::vector<int> rho{representation};
    std::vector<int> mu{vector_size + representation};
    for (int i = 0; i < hidden_layers; ++i) {
      psi.push_back(width);
      rho.push_back(width);
      mu.push_back(width);
    }
    psi.push_back(representation);
    rho.push_back(representation);
    mu.push_back(1);
    psi_ = Mlp(p, "psi.", psi);
    rho_ = Mlp(p, "rho.", rho);
    mu_ = Mlp(p, "mu.", mu);
  }

  void initialize(Parameters& p, Rng& rng) const {
    psi_.initialize(p, rng);
    rho_.initialize(p, rng);
    mu_.initialize(p, rng);
  }

  const Mlp& psi() const { return psi_; }
  const Mlp& rho() const { return rho_; }
  const Mlp& mu() const { return mu_; }

  /// vectors: dv x B; elements: de x (B * set_size). Returns 1 x B.
  Matrix forward(const Parameters& p, const Matrix& vectors, const Matrix& elements,
                 Eigen::Index set_size, DeepSetTape* tape) const {
    const Eigen::Index B = vectors.cols();
    if (set_size < 1) throw ShapeError("deep set needs nonempty sets");
    if (elements.cols() != B * set_size) throw ShapeError("deep set element count mismatch");
    Matrix e = psi_.forward(p, elements, tape ? &tape->psi : nullptr);
    Matrix pooled(e.rows(), B);
    for (Eigen::Index b = 0; b < B; ++b)
      pooled.col(b) = e.middleCols(b * set_size, set_size).rowwise().sum();
    Matrix r = rho_.forward(p, pooled, tape ? &tape->rho : nullptr);
    Matrix joint(vectors.rows() + r.rows(), B);
    joint.topRows(vectors.rows()) = vectors;
    joint.bottomRows(r.rows()) = r;
    if (tape) tape->set_size = set_size;
    return mu_.forward(p, joint, tape ? &tape->mu : nullptr);
  }

  void backward(const Parameters& p, const DeepSetTape& tape, const Matrix& dy,
                Parameters& g) const {
    Matrix djoint;
    mu_.backward(p, tape.mu, dy, g, &djoint);
    const Eigen::Index repr = rho_.output_size();
    Matrix dpooled;
    rho_.backward(p, tape.rho, djoint.bottomRows(repr), g, &dpooled);
    const Eigen::Index B = dy.cols();
    Matrix de(dpooled.rows(), B * tape.set_size);
    for (Eigen::Index b = 0; b < B; ++b)
      de.middleCols(b * tape.set_size, tape.set_size) = dpooled.col(b).replicate(1, tape.set_size);
    psi_.backward(p, tape.psi, de, g, nullptr);
  }

 private:
  Mlp psi_;
  Mlp rho_;
  Mlp mu_;
};

}  // namespace rnnbelief::nn
