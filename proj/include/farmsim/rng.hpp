#ifndef FARMSIM_RNG_HPP_
#define FARMSIM_RNG_HPP_

#include <cstdint>
#include <random>

namespace farmsim {

using Rng = std::mt19937_64;

// Independent random streams are keyed by (seed, kind, index). Each stream
// gets its own engine, so adding draws to one stream never shifts another:
// two policies simulated with one seed see the same arrivals and sizes.
enum class StreamKind : std::uint64_t {
  kArrivals = 1,
  kSizes = 2,
  kReplication = 3,
  kTrace = 4,
};

constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t StreamSeed(std::uint64_t seed, StreamKind kind, std::uint64_t index) {
  return SplitMix64(SplitMix64(SplitMix64(seed) ^ static_cast<std::uint64_t>(kind)) + index);
}

inline Rng MakeStream(std::uint64_t seed, StreamKind kind, std::uint64_t index) {
  return Rng(StreamSeed(seed, kind, index));
}

}  // namespace farmsim

#endif  // FARMSIM_RNG_HPP_
