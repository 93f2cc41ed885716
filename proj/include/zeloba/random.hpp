#pragma once

// Counter-keyed random streams. Every draw in the library is a pure function of
// (master seed, purpose, key tuple), so results do not depend on evaluation order
// or on how work is split across threads.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <vector>

#include "zeloba/errors.hpp"
#include "zeloba/types.hpp"

namespace zeloba {

/// Domain separation between independent uses of the same master seed.
enum class StreamPurpose : std::uint64_t {
  kNoise = 1,
  kDirections = 2,
  kOutput = 3,
  kMonteCarlo = 4,
  kTest = 5,
};

/// Which side of a measurement pair a noise draw belongs to.
enum class Side : std::uint64_t { kBase = 0, kPerturbed = 1 };

namespace detail {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Hashes a key tuple into a 64-bit stream seed.
inline std::uint64_t stream_seed(std::uint64_t master, StreamPurpose purpose,
                                 std::initializer_list<std::uint64_t> key) noexcept {
  std::uint64_t h = detail::mix64(master + detail::kGolden);
  h = detail::mix64(h ^ (static_cast<std::uint64_t>(purpose) * detail::kGolden));
  std::uint64_t pos = 1;
  for (std::uint64_t part : key) {
    h = detail::mix64(h ^ detail::mix64(part + pos * detail::kGolden));
    ++pos;
  }
  return h;
}

/// SplitMix64 sequence started from a stream seed. Satisfies UniformRandomBitGenerator.
class StreamEngine {
 public:
  using result_type = std::uint64_t;

  explicit StreamEngine(std::uint64_t seed) noexcept : state_(seed) {}
  StreamEngine(std::uint64_t master, StreamPurpose purpose,
               std::initializer_list<std::uint64_t> key) noexcept
      : state_(stream_seed(master, purpose, key)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(*this);
  }

 private:
  std::uint64_t state_;
};

/// One direction uniform on the unit sphere S^{d-1} (normalised standard normal).
inline Vector sphere_direction(std::size_t d, StreamEngine& eng) {
  if (d == 0) throw ContractViolation("sphere sampling needs dimension >= 1");
  Vector s(static_cast<Eigen::Index>(d));
  double norm = 0.0;
  do {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (Eigen::Index c = 0; c < s.size(); ++c) s[c] = dist(eng);
    norm = s.norm();
  } while (!(norm > 0.0));
  return s / norm;
}

/// One point uniform in the unit ball: sphere direction scaled by u^{1/d}.
inline Vector ball_point(std::size_t d, StreamEngine& eng) {
  Vector s = sphere_direction(d, eng);
  const double radius = std::pow(eng.uniform(), 1.0 / static_cast<double>(d));
  return radius * s;
}

}  // namespace zeloba
