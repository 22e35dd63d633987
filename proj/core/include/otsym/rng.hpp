#pragma once

#include <cstdint>
#include <random>

namespace otsym {

using Rng = std::mt19937_64;

// Independent sub-streams derived from one master seed.
enum class Stream : std::uint64_t {
  Reference = 1,
  SignTie = 2,
  Null = 3,
  Scenario = 4,
  Replication = 5,
};

/// Counter-based derivation: the same (master, stream, index) triple always
/// yields the same child seed, independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) noexcept;

inline std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index = 0) noexcept {
  return derive_seed(master, static_cast<std::uint64_t>(stream), index);
}

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

/// Uniform draw on the open interval (0, 1) with 53 bits of resolution.
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist;
  return dist(rng);
}

}  // namespace otsym
