#pragma once

// Recurrent cell equations. All cells act on column batches (features x batch).
// sigma is the logistic function, (.) the elementwise product.
//
// LSTM   [i f g o] = [s s tanh s](W x + U h + b)
//        c' = f (.) c + i (.) g,   h' = o (.) tanh(c')        state = [h; c]
// GRU    [r z] = s(W_rz x + U_rz h + b_rz)
//        n = tanh(W_n x + U_n (r (.) h) + b_n),  h' = (1 - z) (.) n + z (.) h
// MGU    f = s(W_f x + U_f h + b_f)
//        n = tanh(W_n x + U_n (f (.) h) + b_n),  h' = (1 - f) (.) h + f (.) n
// BRC    a = 1 + tanh(W_a x + w_a (.) h + b_a),  c = s(W_c x + w_c (.) h + b_c)
//        h' = c (.) h + (1 - c) (.) tanh(W_n x + a (.) h + b_n)
// nBRC   as BRC with full recurrent matrices: U_a h and U_c h in place of w (.) h.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rnnbelief/nn/params.hpp"

namespace rnnbelief::nn {

enum class CellKind { lstm, gru, brc, nbrc, mgu };

inline constexpr CellKind kAllCells[] = {CellKind::lstm, CellKind::gru, CellKind::brc,
                                         CellKind::nbrc, CellKind::mgu};

inline std::string to_string(CellKind k) {
  switch (k) {
    case CellKind::lstm: return "lstm";
    case CellKind::gru: return "gru";
    case CellKind::brc: return "brc";
    case CellKind::nbrc: return "nbrc";
    case CellKind::mgu: return "mgu";
  }
  return "?";
}

inline CellKind parse_cell(std::string_view name) {
  for (CellKind k : kAllCells)
    if (to_string(k) == name) return k;
  throw ConfigError("cell", "unknown cell kind '" + std::string(name) + "'");
}

/// Number of rows of a layer's recurrent state (LSTM carries h and c).
inline int state_rows(CellKind kind, int hidden) { return kind == CellKind::lstm ? 2 * hidden : hidden; }

struct CellCache {
  Matrix x;
  Matrix prev;
  std::vector<Matrix> acts;
};

/// Block indices of one layer inside a Parameters object.
struct CellBlocks {
  int w = -1;       // input weights
  int u = -1;       // recurrent weights (matrix, or H x 2 diagonal pair for BRC)
  int b = -1;       // bias
  int init = -1;    // learned initial state
};

inline CellBlocks add_cell_blocks(Parameters& p, CellKind kind, const std::string& prefix,
                                  int input, int hidden) {
  const int h = hidden;
  CellBlocks cb;
  switch (kind) {
    case CellKind::lstm:
      cb.w = p.add(prefix + "W", 4 * h, input);
      cb.u = p.add(prefix + "U", 4 * h, h);
      cb.b = p.add(prefix + "b", 4 * h, 1);
      break;
    case CellKind::gru:
      cb.w = p.add(prefix + "W", 3 * h, input);
      cb.u = p.add(prefix + "U", 3 * h, h);
      cb.b = p.add(prefix + "b", 3 * h, 1);
      break;
    case CellKind::mgu:
      cb.w = p.add(prefix + "W", 2 * h, input);
      cb.u = p.add(prefix + "U", 2 * h, h);
      cb.b = p.add(prefix + "b", 2 * h, 1);
      break;
    case CellKind::brc:
      cb.w = p.add(prefix + "W", 3 * h, input);
      cb.u = p.add(prefix + "w_mem", h, 2);
      cb.b = p.add(prefix + "b", 3 * h, 1);
      break;
    case CellKind::nbrc:
      cb.w = p.add(prefix + "W", 3 * h, input);
      cb.u = p.add(prefix + "U", 2 * h, h);
      cb.b = p.add(prefix + "b", 3 * h, 1);
      break;
  }
  cb.init = p.add(prefix + "init", state_rows(kind, h), 1);
  return cb;
}

inline void init_cell_blocks(Parameters& p, const CellBlocks& cb, int input, int hidden, Rng& rng) {
  fill_uniform(p[cb.w], 1.0 / std::sqrt(static_cast<double>(input)), rng);
  fill_uniform(p[cb.u], 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  fill_uniform(p[cb.b], 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  p[cb.init].setZero();
}

namespace detail {

inline Matrix affine(const Parameters& p, const CellBlocks& cb, const Matrix& x) {
  Matrix z = p[cb.w] * x;
  z.colwise() += p[cb.b].col(0);
  return z;
}

inline void accumulate_input_grads(const Parameters& p, const CellBlocks& cb, const Matrix& dz,
                                   const Matrix& x, Parameters& g, Matrix& dx) {
  g[cb.w].noalias() += dz * x.transpose();
  g[cb.b].col(0) += dz.rowwise().sum();
  dx.noalias() = p[cb.w].transpose() * dz;
}

inline Matrix dsigmoid(const Matrix& s) { return (s.array() * (1.0 - s.array())).matrix(); }
inline Matrix dtanh(const Matrix& t) { return (1.0 - t.array().square()).matrix(); }

}  // namespace detail

inline Matrix cell_forward(CellKind kind, const Parameters& p, const CellBlocks& cb, int hidden,
                           const Matrix& prev, const Matrix& x, CellCache* cache) {
  using namespace detail;
  const Eigen::Index h = hidden;
  if (x.rows() != p[cb.w].cols() || prev.rows() != state_rows(kind, hidden) ||
      prev.cols() != x.cols())
    throw ShapeError("cell_forward: input or state shape mismatch");
  Matrix next;
  std::vector<Matrix> acts;
  switch (kind) {
    case CellKind::lstm: {
      const auto hp = prev.topRows(h);
      const auto cp = prev.bottomRows(h);
      Matrix z = affine(p, cb, x);
      z.noalias() += p[cb.u] * hp;
      Matrix i = sigmoid(z.topRows(h));
      Matrix f = sigmoid(z.middleRows(h, h));
      Matrix g = tanh(z.middleRows(2 * h, h));
      Matrix o = sigmoid(z.bottomRows(h));
      Matrix c = (f.array() * cp.array() + i.array() * g.array()).matrix();
      Matrix tc = tanh(c);
      next.resize(2 * h, x.cols());
      next.topRows(h) = (o.array() * tc.array()).matrix();
      next.bottomRows(h) = c;
      acts = {std::move(i), std::move(f), std::move(g), std::move(o), std::move(tc)};
      break;
    }
    case CellKind::gru: {
      Matrix a = affine(p, cb, x);
      Matrix rz = sigmoid(a.topRows(2 * h) + p[cb.u].topRows(2 * h) * prev);
      Matrix r = rz.topRows(h);
      Matrix z = rz.bottomRows(h);
      Matrix rh = (r.array() * prev.array()).matrix();
      Matrix n = tanh(a.bottomRows(h) + p[cb.u].bottomRows(h) * rh);
      next = ((1.0 - z.array()) * n.array() + z.array() * prev.array()).matrix();
      acts = {std::move(r), std::move(z), std::move(n), std::move(rh)};
      break;
    }
    case CellKind::mgu: {
      Matrix a = affine(p, cb, x);
      Matrix f = sigmoid(a.topRows(h) + p[cb.u].topRows(h) * prev);
      Matrix fh = (f.array() * prev.array()).matrix();
      Matrix n = tanh(a.bottomRows(h) + p[cb.u].bottomRows(h) * fh);
      next = ((1.0 - f.array()) * prev.array() + f.array() * n.array()).matrix();
      acts = {std::move(f), std::move(n), std::move(fh)};
      break;
    }
    case CellKind::brc:
    case CellKind::nbrc: {
      Matrix z = affine(p, cb, x);
      Matrix pa;
      Matrix pc;
      if (kind == CellKind::brc) {
        pa = (prev.array().colwise() * p[cb.u].col(0).array()).matrix();
        pc = (prev.array().colwise() * p[cb.u].col(1).array()).matrix();
      } else {
        pa = p[cb.u].topRows(h) * prev;
        pc = p[cb.u].bottomRows(h) * prev;
      }
      Matrix ta = tanh(z.topRows(h) + pa);
      Matrix c = sigmoid(z.middleRows(h, h) + pc);
      Matrix n = tanh(z.bottomRows(h) + ((ta.array() + 1.0) * prev.array()).matrix());
      next = (c.array() * prev.array() + (1.0 - c.array()) * n.array()).matrix();
      acts = {std::move(ta), std::move(c), std::move(n)};
      break;
    }
  }
  if (cache) {
    cache->x = x;
    cache->prev = prev;
    cache->acts = std::move(acts);
  }
  return next;
}

/// Reverse step: given dL/d(next state), accumulate parameter gradients into
/// `g`, write dL/dx into `dx` and return dL/d(previous state).
inline Matrix cell_backward(CellKind kind, const Parameters& p, const CellBlocks& cb, int hidden,
                            const CellCache& cache, const Matrix& dnext, Parameters& g,
                            Matrix& dx) {
  using namespace detail;
  const Eigen::Index h = hidden;
  const Matrix& prev = cache.prev;
  const Matrix& x = cache.x;
  const auto& A = cache.acts;
  Matrix dprev;
  switch (kind) {
    case CellKind::lstm: {
      const Matrix& i = A[0];
      const Matrix& f = A[1];
      const Matrix& gg = A[2];
      const Matrix& o = A[3];
      const Matrix& tc = A[4];
      const auto hp = prev.topRows(h);
      const auto cp = prev.bottomRows(h);
      const auto dh = dnext.topRows(h);
      Matrix dc = dnext.bottomRows(h);
      dc.array() += dh.array() * o.array() * (1.0 - tc.array().square());
      Matrix dz(4 * h, x.cols());
      dz.topRows(h) = (dc.array() * gg.array() * i.array() * (1.0 - i.array())).matrix();
      dz.middleRows(h, h) = (dc.array() * cp.array() * f.array() * (1.0 - f.array())).matrix();
      dz.middleRows(2 * h, h) = (dc.array() * i.array() * (1.0 - gg.array().square())).matrix();
      dz.bottomRows(h) = (dh.array() * tc.array() * o.array() * (1.0 - o.array())).matrix();
      accumulate_input_grads(p, cb, dz, x, g, dx);
      g[cb.u].noalias() += dz * hp.transpose();
      dprev.resize(2 * h, x.cols());
      dprev.topRows(h).noalias() = p[cb.u].transpose() * dz;
      dprev.bottomRows(h) = (dc.array() * f.array()).matrix();
      break;
    }
    case CellKind::gru: {
      const Matrix& r = A[0];
      const Matrix& z = A[1];
      const Matrix& n = A[2];
      const Matrix& rh = A[3];
      Matrix dan = (dnext.array() * (1.0 - z.array()) * (1.0 - n.array().square())).matrix();
      Matrix daz = (dnext.array() * (prev.array() - n.array()) * z.array() * (1.0 - z.array())).matrix();
      g[cb.u].bottomRows(h).noalias() += dan * rh.transpose();
      Matrix drh = p[cb.u].bottomRows(h).transpose() * dan;
      Matrix dar = (drh.array() * prev.array() * r.array() * (1.0 - r.array())).matrix();
      dprev = (dnext.array() * z.array() + drh.array() * r.array()).matrix();
      Matrix da(3 * h, x.cols());
      da.topRows(h) = dar;
      da.middleRows(h, h) = daz;
      da.bottomRows(h) = dan;
      accumulate_input_grads(p, cb, da, x, g, dx);
      g[cb.u].topRows(2 * h).noalias() += da.topRows(2 * h) * prev.transpose();
      dprev.noalias() += p[cb.u].topRows(2 * h).transpose() * da.topRows(2 * h);
      break;
    }
    case CellKind::mgu: {
      const Matrix& f = A[0];
      const Matrix& n = A[1];
      const Matrix& fh = A[2];
      Matrix dan = (dnext.array() * f.array() * (1.0 - n.array().square())).matrix();
      g[cb.u].bottomRows(h).noalias() += dan * fh.transpose();
      Matrix dfh = p[cb.u].bottomRows(h).transpose() * dan;
      Matrix df = (dnext.array() * (n.array() - prev.array()) + dfh.array() * prev.array()).matrix();
      Matrix daf = (df.array() * f.array() * (1.0 - f.array())).matrix();
      dprev = (dnext.array() * (1.0 - f.array()) + dfh.array() * f.array()).matrix();
      Matrix da(2 * h, x.cols());
      da.topRows(h) = daf;
      da.bottomRows(h) = dan;
      accumulate_input_grads(p, cb, da, x, g, dx);
      g[cb.u].topRows(h).noalias() += daf * prev.transpose();
      dprev.noalias() += p[cb.u].topRows(h).transpose() * daf;
      break;
    }
    case CellKind::brc:
    case CellKind::nbrc: {
      const Matrix& ta = A[0];
      const Matrix& c = A[1];
      const Matrix& n = A[2];
      Matrix dan = (dnext.array() * (1.0 - c.array()) * (1.0 - n.array().square())).matrix();
      Matrix dac = (dnext.array() * (prev.array() - n.array()) * c.array() * (1.0 - c.array())).matrix();
      Matrix daa = (dan.array() * prev.array() * (1.0 - ta.array().square())).matrix();
      dprev = (dnext.array() * c.array() + dan.array() * (ta.array() + 1.0)).matrix();
      Matrix dz(3 * h, x.cols());
      dz.topRows(h) = daa;
      dz.middleRows(h, h) = dac;
      dz.bottomRows(h) = dan;
      accumulate_input_grads(p, cb, dz, x, g, dx);
      if (kind == CellKind::brc) {
        g[cb.u].col(0) += (daa.array() * prev.array()).rowwise().sum().matrix();
        g[cb.u].col(1) += (dac.array() * prev.array()).rowwise().sum().matrix();
        dprev.array() += daa.array().colwise() * p[cb.u].col(0).array() +
                         dac.array().colwise() * p[cb.u].col(1).array();
      } else {
        g[cb.u].noalias() += dz.topRows(2 * h) * prev.transpose();
        dprev.noalias() += p[cb.u].transpose() * dz.topRows(2 * h);
      }
      break;
    }
  }
  return dprev;
}

}  // namespace rnnbelief::nn
