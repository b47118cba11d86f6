#pragma once

// Plain-text parameter checkpoints:
//
//   rnnbelief-parameters 1
//   <block count>
//   <name> <rows> <cols>          one header per block, followed by
//   <v v v ...>                   `rows` lines of row-major values
//
// Values use the shortest decimal form that round-trips exactly. A recurrent
// network checkpoint prefixes the parameters with its architecture:
//
//   rnnbelief-rnn 1
//   cell <lstm|gru|brc|nbrc|mgu>
//   input <n>  hidden <n>  layers <n>  outputs <n>   (one key per line)

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "rnnbelief/nn/rnn.hpp"

namespace rnnbelief::nn {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("checkpoint: bad number '" + s + "'");
  return v;
}

inline void write_parameters(std::ostream& os, const Parameters& p) {
  os << "rnnbelief-parameters 1\n" << p.size() << "\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Matrix& m = p[i];
    os << p.names[i] << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) os << ' ';
        os << format_double(m(r, c));
      }
      os << '\n';
    }
  }
}

/// Reads into an existing layout; names and shapes must match.
inline void read_parameters(std::istream& is, Parameters& p) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(is >> magic >> version) || magic != "rnnbelief-parameters" || version != 1)
    throw Error("checkpoint: not a parameter file");
  if (!(is >> count) || count != p.size()) throw Error("checkpoint: block count mismatch");
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(is >> name >> rows >> cols)) throw Error("checkpoint: truncated block header");
    if (name != p.names[i] || rows != p[i].rows() || cols != p[i].cols())
      throw Error("checkpoint: block '" + name + "' does not match layout");
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) {
        std::string tok;
        if (!(is >> tok)) throw Error("checkpoint: truncated values");
        p[i](r, c) = parse_double(tok);
      }
  }
}

inline void write_rnn(std::ostream& os, const RnnStack& net) {
  const RnnSpec& s = net.spec();
  os << "rnnbelief-rnn 1\n"
     << "cell " << to_string(s.cell) << "\n"
     << "input " << s.input_size << "\n"
     << "hidden " << s.hidden_size << "\n"
     << "layers " << s.num_layers << "\n"
     << "outputs " << s.num_outputs << "\n";
  write_parameters(os, net.params());
}

inline RnnStack read_rnn(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "rnnbelief-rnn" || version != 1)
    throw Error("checkpoint: not a recurrent network file");
  RnnSpec spec;
  auto expect = [&](const char* key) {
    std::string k;
    if (!(is >> k) || k != key) throw Error(std::string("checkpoint: expected key ") + key);
  };
  std::string cell;
  expect("cell");
  is >> cell;
  spec.cell = parse_cell(cell);
  expect("input");
  is >> spec.input_size;
  expect("hidden");
  is >> spec.hidden_size;
  expect("layers");
  is >> spec.num_layers;
  expect("outputs");
  is >> spec.num_outputs;
  if (!is) throw Error("checkpoint: bad architecture header");
  RnnStack net(spec);
  read_parameters(is, net.params());
  return net;
}

inline void save_rnn(const std::string& path, const RnnStack& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  write_rnn(os, net);
}

inline RnnStack load_rnn(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  return read_rnn(is);
}

}  // namespace rnnbelief::nn
