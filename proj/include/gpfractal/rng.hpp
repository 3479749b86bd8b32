#pragma once

#include <cstdint>
#include <random>

namespace gpfractal {

/// SplitMix64 finalizer; used to derive independent substream keys.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Key of the substream for (seed, stream, lane). Streams are paths, lanes are components.
constexpr std::uint64_t substream_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t lane) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ (lane * 0xd1b54a32d192ed03ULL));
}

/// Generator for one substream. Draws depend only on the key, never on scheduling.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t lane = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(substream_key(seed, stream, lane)),
                    static_cast<std::uint32_t>(substream_key(seed, stream, lane) >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace gpfractal
