#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rnnbelief/errors.hpp"
#include "rnnbelief/random.hpp"

namespace rnnbelief::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Named list of dense parameter blocks. Gradients use the same layout.
struct Parameters {
  std::vector<std::string> names;
  std::vector<Matrix> blocks;

  int add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    names.push_back(std::move(name));
    blocks.push_back(Matrix::Zero(rows, cols));
    return static_cast<int>(blocks.size()) - 1;
  }

  std::size_t size() const { return blocks.size(); }
  Matrix& operator[](std::size_t i) { return blocks[i]; }
  const Matrix& operator[](std::size_t i) const { return blocks[i]; }

  Eigen::Index num_scalars() const {
    Eigen::Index n = 0;
    for (const Matrix& m : blocks) n += m.size();
    return n;
  }

  Parameters zeros_like() const {
    Parameters out;
    out.names = names;
    out.blocks.reserve(blocks.size());
    for (const Matrix& m : blocks) out.blocks.push_back(Matrix::Zero(m.rows(), m.cols()));
    return out;
  }

  void set_zero() {
    for (Matrix& m : blocks) m.setZero();
  }

  bool same_shape(const Parameters& other) const {
    if (other.blocks.size() != blocks.size()) return false;
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (blocks[i].rows() != other.blocks[i].rows() || blocks[i].cols() != other.blocks[i].cols())
        return false;
    return true;
  }

  void add_scaled(const Parameters& other, double scale) {
    if (!same_shape(other)) throw ShapeError("parameter layouts differ");
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] += scale * other.blocks[i];
  }

  bool all_finite() const {
    for (const Matrix& m : blocks)
      if (!m.allFinite()) return false;
    return true;
  }

  /// Visit every scalar in block order, row-major inside a block.
  template <class Fn>
  void for_each_scalar(Fn&& fn) {
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (Eigen::Index r = 0; r < blocks[b].rows(); ++r)
        for (Eigen::Index c = 0; c < blocks[b].cols(); ++c) fn(b, blocks[b](r, c));
  }
};

inline void fill_uniform(Matrix& m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
}

inline Matrix sigmoid(const Matrix& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

inline Matrix tanh(const Matrix& z) { return z.array().tanh().matrix(); }

}  // namespace rnnbelief::nn
