#pragma once

// Stacked recurrent Q-network: `layers` cells of one kind, a learned initial
// state per layer, and a linear head o(h) = W h + b on the top layer's h.
// Layer l > 0 consumes layer l-1's h. Sequences are processed as column
// batches; each column may read out its q-values at a different step.

#include <optional>
#include <vector>

#include "rnnbelief/nn/cells.hpp"

namespace rnnbelief::nn {

struct RnnSpec {
  CellKind cell = CellKind::gru;
  int input_size = 1;
  int hidden_size = 32;
  int num_layers = 2;
  int num_outputs = 1;

  friend bool operator==(const RnnSpec&, const RnnSpec&) = default;
};

/// Per-layer recurrent state, each block state_rows x batch.
using RecurrentState = std::vector<Matrix>;

struct RnnTape {
  int steps = 0;
  std::vector<std::vector<CellCache>> cells;  // [step][layer]
  std::vector<Matrix> top;                    // top-layer h per step
  std::vector<int> readout;                   // per column
};

class RnnStack {
 public:
  RnnStack() = default;

  explicit RnnStack(const RnnSpec& spec) : spec_(spec) {
    if (spec.input_size < 1 || spec.hidden_size < 1 || spec.num_layers < 1 || spec.num_outputs < 1)
      throw ConfigError("network", "all sizes must be positive");
    for (int l = 0; l < spec.num_layers; ++l) {
      const int in = l == 0 ? spec.input_size : spec.hidden_size;
      layers_.push_back(add_cell_blocks(params_, spec.cell, "layer" + std::to_string(l) + ".",
                                        in, spec.hidden_size));
    }
    head_w_ = params_.add("head.W", spec.num_outputs, spec.hidden_size);
    head_b_ = params_.add("head.b", spec.num_outputs, 1);
  }

  RnnStack(const RnnSpec& spec, Rng& rng) : RnnStack(spec) { initialize(rng); }

  /// Uniform in +-1/sqrt(fan-in); initial states at zero.
  void initialize(Rng& rng) {
    for (int l = 0; l < spec_.num_layers; ++l) {
      const int in = l == 0 ? spec_.input_size : spec_.hidden_size;
      init_cell_blocks(params_, layers_[static_cast<std::size_t>(l)], in, spec_.hidden_size, rng);
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec_.hidden_size));
    fill_uniform(params_[static_cast<std::size_t>(head_w_)], bound, rng);
    fill_uniform(params_[static_cast<std::size_t>(head_b_)], bound, rng);
  }

  const RnnSpec& spec() const { return spec_; }
  Parameters& params() { return params_; }
  const Parameters& params() const { return params_; }
  int layer_state_rows() const { return state_rows(spec_.cell, spec_.hidden_size); }
  /// Size of the concatenated recurrent state of all layers.
  int state_size() const { return spec_.num_layers * layer_state_rows(); }

  RecurrentState initial_state(Eigen::Index batch = 1) const {
    RecurrentState s;
    for (const CellBlocks& cb : layers_)
      s.push_back(params_[static_cast<std::size_t>(cb.init)].col(0).replicate(1, batch));
    return s;
  }

  /// h_k = u(h_{k-1}, x_k) through every layer.
  void advance(RecurrentState& state, const Matrix& x) const {
    Matrix in = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      state[l] = cell_forward(spec_.cell, params_, layers_[l], spec_.hidden_size, state[l], in, nullptr);
      in = state[l].topRows(spec_.hidden_size);
    }
  }

  Matrix q_values(const RecurrentState& state) const {
    Matrix q = params_[static_cast<std::size_t>(head_w_)] *
               state.back().topRows(spec_.hidden_size);
    q.colwise() += params_[static_cast<std::size_t>(head_b_)].col(0);
    return q;
  }

  static Vector flatten(const RecurrentState& state, Eigen::Index column = 0) {
    Eigen::Index n = 0;
    for (const Matrix& m : state) n += m.rows();
    Vector out(n);
    Eigen::Index off = 0;
    for (const Matrix& m : state) {
      out.segment(off, m.rows()) = m.col(column);
      off += m.rows();
    }
    return out;
  }

  struct Unrolled {
    Matrix states;  // state_size x steps, concatenated layer states after each input
    Vector q;       // head output after the last input
  };

  /// Single-sequence unroll of inputs (input_size x steps).
  Unrolled unroll(const Matrix& inputs) const { return unroll_from(initial_state(1), inputs); }

  Unrolled unroll_from(RecurrentState state, const Matrix& inputs) const {
    if (inputs.cols() < 1) throw ShapeError("unroll needs at least one input");
    Unrolled out;
    out.states.resize(state_size(), inputs.cols());
    for (Eigen::Index t = 0; t < inputs.cols(); ++t) {
      advance(state, inputs.col(t));
      out.states.col(t) = flatten(state);
    }
    out.q = q_values(state).col(0);
    return out;
  }

  RecurrentState final_state(const Matrix& inputs) const {
    RecurrentState state = initial_state(1);
    for (Eigen::Index t = 0; t < inputs.cols(); ++t) advance(state, inputs.col(t));
    return state;
  }

  /// Batched forward over steps.size() inputs (input_size x batch each);
  /// column b reads out after input readout[b]. Returns num_outputs x batch.
  Matrix forward(const std::vector<Matrix>& steps, const std::vector<int>& readout,
                 RnnTape* tape) const {
    const int T = static_cast<int>(steps.size());
    if (T < 1) throw ShapeError("forward needs at least one step");
    const Eigen::Index B = steps.front().cols();
    if (static_cast<Eigen::Index>(readout.size()) != B) throw ShapeError("readout size != batch");
    for (int r : readout)
      if (r < 0 || r >= T) throw ShapeError("readout step outside the sequence");
    RecurrentState state = initial_state(B);
    Matrix top_at_readout(spec_.hidden_size, B);
    if (tape) {
      tape->steps = T;
      tape->cells.assign(static_cast<std::size_t>(T), std::vector<CellCache>(layers_.size()));
      tape->top.assign(static_cast<std::size_t>(T), Matrix());
      tape->readout = readout;
    }
    for (int t = 0; t < T; ++t) {
      const Matrix* in = &steps[static_cast<std::size_t>(t)];
      Matrix h_below;
      for (std::size_t l = 0; l < layers_.size(); ++l) {
        CellCache* c = tape ? &tape->cells[static_cast<std::size_t>(t)][l] : nullptr;
        state[l] = cell_forward(spec_.cell, params_, layers_[l], spec_.hidden_size, state[l], *in, c);
        h_below = state[l].topRows(spec_.hidden_size);
        in = &h_below;
      }
      for (Eigen::Index b = 0; b < B; ++b)
        if (readout[static_cast<std::size_t>(b)] == t) top_at_readout.col(b) = h_below.col(b);
      if (tape) tape->top[static_cast<std::size_t>(t)] = h_below;
    }
    Matrix q = params_[static_cast<std::size_t>(head_w_)] * top_at_readout;
    q.colwise() += params_[static_cast<std::size_t>(head_b_)].col(0);
    return q;
  }

  /// Backpropagation through time for dL/dq (num_outputs x batch). Gradients
  /// are accumulated into `grads`, including the learned initial states.
  void backward(const RnnTape& tape, const Matrix& dq, Parameters& grads) const {
    const Eigen::Index B = dq.cols();
    const auto hw = static_cast<std::size_t>(head_w_);
    const Eigen::Index H = spec_.hidden_size;
    grads[static_cast<std::size_t>(head_b_)].col(0) += dq.rowwise().sum();
    const Matrix dtop_all = params_[hw].transpose() * dq;  // H x B

    std::vector<Matrix> dstate;
    for (std::size_t l = 0; l < layers_.size(); ++l)
      dstate.push_back(Matrix::Zero(layer_state_rows(), B));

    Matrix dx;
    for (int t = tape.steps - 1; t >= 0; --t) {
      const auto ts = static_cast<std::size_t>(t);
      Matrix dtop = Matrix::Zero(H, B);
      for (Eigen::Index b = 0; b < B; ++b) {
        if (tape.readout[static_cast<std::size_t>(b)] != t) continue;
        dtop.col(b) = dtop_all.col(b);
        grads[hw].noalias() += dq.col(b) * tape.top[ts].col(b).transpose();
      }
      Matrix dh_from_above = std::move(dtop);
      for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
        const auto ls = static_cast<std::size_t>(l);
        dstate[ls].topRows(H) += dh_from_above;
        dstate[ls] = cell_backward(spec_.cell, params_, layers_[ls], spec_.hidden_size,
                                   tape.cells[ts][ls], dstate[ls], grads, dx);
        dh_from_above = dx;
      }
    }
    for (std::size_t l = 0; l < layers_.size(); ++l)
      grads[static_cast<std::size_t>(layers_[l].init)].col(0) += dstate[l].rowwise().sum();
  }

 private:
  RnnSpec spec_;
  Parameters params_;
  std::vector<CellBlocks> layers_;
  int head_w_ = -1;
  int head_b_ = -1;
};

/// First index of the maximum; ties go to the lowest action.
inline int argmax_lowest(const Eigen::Ref<const Vector>& q) {
  int best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i)
    if (q(i) > q(best)) best = static_cast<int>(i);
  return best;
}

}  // namespace rnnbelief::nn
