#ifndef LADMM_RNG_HPP_
#define LADMM_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ladmm {

//! Seedable generator with a fixed, documented output stream.
//!
//! The engine is std::mt19937_64, whose raw output sequence is fixed by the C++ standard. The
//! distributions are implemented here instead of using <random>'s, whose algorithms are
//! implementation-defined:
//!  - uniform():       (u >> 11) * 2^-53, in [0, 1)
//!  - normal():        Box-Muller, cosine branch only: two raw draws u1, u2 per sample,
//!                     sqrt(-2 ln(1 - uniform(u1))) * cos(2 pi uniform(u2))
//!  - below(n):        rejection sampling on u mod n, rejecting u >= 2^64 - (2^64 mod n)
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  //! Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n + 1) % n;
    while (true) {
      const std::uint64_t u = next_u64();
      if (u <= limit) {
        return u % n;
      }
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ladmm

#endif  // LADMM_RNG_HPP_
