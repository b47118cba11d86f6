#pragma once

// SampleSet binary layout, all integers and doubles little-endian:
//
//   char[8]  "RBSAMPLE"
//   u32      version (1)
//   i32      checkpoint episode
//   i64      N                 records
//   i64      hidden_dim
//   i64      belief_rows
//   i64      set_size          0 for vector beliefs
//   i64      irrelevant_dim    0 without irrelevant variables
//   N records of:
//     i32     t
//     f64[hidden_dim]
//     f64[belief_rows * max(set_size, 1)]   column-major
//     f64[irrelevant_dim]

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "rnnbelief/experiment/sampling.hpp"

namespace rnnbelief::experiment {

namespace detail {

inline constexpr char kSampleMagic[8] = {'R', 'B', 'S', 'A', 'M', 'P', 'L', 'E'};
inline constexpr std::uint32_t kSampleVersion = 1;

template <class U>
void put_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> b;
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), b.size());
}

template <class U>
U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> b;
  if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) throw Error("sample set: truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

inline void put_i64(std::ostream& os, std::int64_t v) { put_le(os, static_cast<std::uint64_t>(v)); }
inline std::int64_t get_i64(std::istream& is) { return static_cast<std::int64_t>(get_le<std::uint64_t>(is)); }
inline void put_f64(std::ostream& os, double v) { put_le(os, std::bit_cast<std::uint64_t>(v)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

}  // namespace detail

inline void write_samples(std::ostream& os, const SampleSet& s) {
  const Eigen::Index n = s.size();
  const Eigen::Index per = std::max<Eigen::Index>(s.set_size, 1);
  if (static_cast<Eigen::Index>(s.steps.size()) != n || s.relevant.cols() != n * per ||
      (s.irrelevant.rows() > 0 && s.irrelevant.cols() != n))
    throw ShapeError("sample set: inconsistent record counts");
  os.write(detail::kSampleMagic, sizeof(detail::kSampleMagic));
  detail::put_le(os, detail::kSampleVersion);
  detail::put_le(os, static_cast<std::uint32_t>(s.episode));
  detail::put_i64(os, n);
  detail::put_i64(os, s.hidden.rows());
  detail::put_i64(os, s.relevant.rows());
  detail::put_i64(os, s.set_size);
  detail::put_i64(os, s.irrelevant.rows());
  for (Eigen::Index i = 0; i < n; ++i) {
    detail::put_le(os, static_cast<std::uint32_t>(s.steps[static_cast<std::size_t>(i)]));
    for (Eigen::Index k = 0; k < s.hidden.rows(); ++k) detail::put_f64(os, s.hidden(k, i));
    for (Eigen::Index c = i * per; c < (i + 1) * per; ++c)
      for (Eigen::Index k = 0; k < s.relevant.rows(); ++k) detail::put_f64(os, s.relevant(k, c));
    for (Eigen::Index k = 0; k < s.irrelevant.rows(); ++k) detail::put_f64(os, s.irrelevant(k, i));
  }
  if (!os) throw Error("sample set: write failed");
}

inline SampleSet read_samples(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, detail::kSampleMagic, sizeof(magic)) != 0)
    throw Error("sample set: bad magic");
  const auto version = detail::get_le<std::uint32_t>(is);
  if (version != detail::kSampleVersion) throw Error("sample set: unsupported version " + std::to_string(version));
  SampleSet s;
  s.episode = static_cast<std::int32_t>(detail::get_le<std::uint32_t>(is));
  const std::int64_t n = detail::get_i64(is);
  const std::int64_t dh = detail::get_i64(is);
  const std::int64_t db = detail::get_i64(is);
  s.set_size = detail::get_i64(is);
  const std::int64_t di = detail::get_i64(is);
  constexpr std::int64_t kLimit = std::int64_t{1} << 32;
  if (n < 0 || dh < 0 || db < 0 || s.set_size < 0 || di < 0 || n > kLimit || dh > kLimit || db > kLimit ||
      s.set_size > kLimit || di > kLimit)
    throw Error("sample set: bad header");
  const Eigen::Index per = std::max<Eigen::Index>(s.set_size, 1);
  s.hidden.resize(dh, n);
  s.relevant.resize(db, n * per);
  s.irrelevant.resize(di, di > 0 ? n : 0);
  s.steps.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    s.steps[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(detail::get_le<std::uint32_t>(is));
    for (Eigen::Index k = 0; k < dh; ++k) s.hidden(k, i) = detail::get_f64(is);
    for (Eigen::Index c = i * per; c < (i + 1) * per; ++c)
      for (Eigen::Index k = 0; k < db; ++k) s.relevant(k, c) = detail::get_f64(is);
    for (Eigen::Index k = 0; k < di; ++k) s.irrelevant(k, i) = detail::get_f64(is);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw Error("sample set: trailing bytes");
  return s;
}

inline void save_samples(const std::string& path, const SampleSet& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path + "'");
  write_samples(os, s);
}

inline SampleSet load_samples(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_samples(is);
}

}  // namespace rnnbelief::experiment
