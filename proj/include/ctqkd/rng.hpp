#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace ctqkd {

// mt19937_64 and seed_seq are fully specified by the standard, so streams
// derived here are reproducible across toolchains. The std::*_distribution
// adaptors are not; they are only used where per-platform determinism is
// enough (photon-number sampling, curve trial counts).
using Rng = std::mt19937_64;

/// Independent generator for one role of a session (Alice, Bob, Eve, ...).
inline Rng derive_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream,
                    0x43544451u};
  return Rng(seq);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// p = 0 never fires, p = 1 always fires.
inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

inline int uniform_int(Rng& rng, int n) {
  return static_cast<int>(uniform01(rng) * n);
}

}  // namespace ctqkd
