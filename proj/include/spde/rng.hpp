#pragma once

#include <cstdint>
#include <random>

namespace spde {

/// SplitMix64 mixing step.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream derivation: each (base seed, sample index, channel)
/// triple names one independent stream, so sample k draws the same numbers
/// no matter how samples are distributed over workers.
inline std::uint64_t deriveSeed(std::uint64_t base, std::uint64_t sample,
                                std::uint64_t channel) {
  std::uint64_t s = splitmix64(base);
  s = splitmix64(s ^ splitmix64(sample + 0x632be59bd9b4e019ULL));
  s = splitmix64(s ^ splitmix64(channel + 0x9e3779b97f4a7c15ULL));
  return s;
}

inline std::mt19937_64 makeStream(std::uint64_t base, std::uint64_t sample,
                                  std::uint64_t channel) {
  return std::mt19937_64(deriveSeed(base, sample, channel));
}

/// Channel ids. fBm modes occupy [0, kJumpTimesChannel).
namespace channels {
constexpr std::uint64_t kJumpTimesChannel = 0x4a756d7054696d65ULL;
constexpr std::uint64_t kJumpMarksChannel = 0x4a756d704d61726bULL;
inline std::uint64_t fbmMode(int mode_index) {
  return static_cast<std::uint64_t>(mode_index);
}
}  // namespace channels

}  // namespace spde
