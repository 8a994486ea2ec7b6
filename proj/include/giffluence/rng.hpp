#pragma once

#include <cstdint>
#include <random>

namespace giffluence {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from (master seed, stream tag, counter).
/// Replicate r of a procedure always sees the same stream, whichever worker runs it.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter) noexcept {
  return mix64(mix64(mix64(master) ^ stream) ^ counter);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t master, std::uint64_t stream, std::uint64_t counter) {
  return Engine{derive_seed(master, stream, counter)};
}

/// Stream tags keep the procedures that share one master seed decorrelated.
namespace stream {
inline constexpr std::uint64_t kBootstrap = 0xB0075;
inline constexpr std::uint64_t kNelsonKim = 0x4E4B;
inline constexpr std::uint64_t kSynthLatent = 0x5141;
inline constexpr std::uint64_t kSynthDay = 0x5D41;
inline constexpr std::uint64_t kSynthMarket = 0x3A4B;
inline constexpr std::uint64_t kSynthFirms = 0xF123;
}  // namespace stream

}  // namespace giffluence
