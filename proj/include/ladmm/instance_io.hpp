#ifndef LADMM_INSTANCE_IO_HPP_
#define LADMM_INSTANCE_IO_HPP_

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ladmm/lasso.hpp"

// Binary LASSO instance container. All fields little-endian:
//
//   offset  size     field
//   0       8        magic "LADMMLI1"
//   8       8        m      (uint64)
//   16      8        n      (uint64)
//   24      8        seed   (uint64)
//   32      8        sigma  (IEEE-754 binary64)
//   40      8*m*n    A, column-major
//   ...     8*m      labels b
//   ...     8*n      y_true
//
// The Gram norms are not stored; they are recomputed on load.
namespace ladmm::lasso {

inline constexpr std::array<char, 8> kInstanceMagic = {'L', 'A', 'D', 'M', 'M', 'L', 'I', '1'};

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) {
    buf[i] = static_cast<unsigned char>(v >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(buf), 8);
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) {
    throw std::runtime_error("read_instance: truncated stream");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  }
  return v;
}

inline void put_f64(std::ostream& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace detail

inline void write_instance(std::ostream& out, const LassoInstance& inst) {
  out.write(kInstanceMagic.data(), kInstanceMagic.size());
  detail::put_u64(out, static_cast<std::uint64_t>(inst.m()));
  detail::put_u64(out, static_cast<std::uint64_t>(inst.n()));
  detail::put_u64(out, inst.seed);
  detail::put_f64(out, inst.sigma);
  const Matrix& a = inst.a();
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      detail::put_f64(out, a(i, j));
    }
  }
  for (Index i = 0; i < inst.labels.size(); ++i) detail::put_f64(out, inst.labels(i));
  for (Index i = 0; i < inst.y_true.size(); ++i) detail::put_f64(out, inst.y_true(i));
  if (!out) {
    throw std::runtime_error("write_instance: stream error");
  }
}

inline LassoInstance read_instance(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kInstanceMagic) {
    throw std::runtime_error("read_instance: bad magic");
  }
  const auto m = static_cast<Index>(detail::get_u64(in));
  const auto n = static_cast<Index>(detail::get_u64(in));
  const std::uint64_t seed = detail::get_u64(in);
  const double sigma = detail::get_f64(in);
  if (m <= 0 || n <= 0 || m > (Index{1} << 20) || n > (Index{1} << 20)) {
    throw std::runtime_error("read_instance: implausible dimensions");
  }
  Matrix a(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) {
      a(i, j) = detail::get_f64(in);
    }
  }
  Vector b(m);
  for (Index i = 0; i < m; ++i) b(i) = detail::get_f64(in);
  Vector y_true(n);
  for (Index i = 0; i < n; ++i) y_true(i) = detail::get_f64(in);
  LassoInstance inst = make_instance(std::move(a), std::move(b), sigma, std::move(y_true));
  inst.seed = seed;
  return inst;
}

inline void save_instance(const std::string& path, const LassoInstance& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_instance: cannot open " + path);
  }
  write_instance(out, inst);
}

inline LassoInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_instance: cannot open " + path);
  }
  return read_instance(in);
}

}  // namespace ladmm::lasso

#endif  // LADMM_INSTANCE_IO_HPP_
