#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace beamwander {

using Engine = std::mt19937_64;

/// Independent random streams derived from one master seed.
enum class Stream : std::uint64_t {
  turbulence_screen = 1,
  source_screen = 2,
  rays = 3,
  mode_screen = 4,
  validation = 5,
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace detail

/// Counter-based seed: depends only on (master, stream, indices), never on worker
/// count or evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                 std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = detail::splitmix64(master ^ 0x6a09e667f3bcc909ULL);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(stream));
  for (auto c : counters)
    h = detail::splitmix64(h ^ c);
  return h;
}

inline Engine make_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Engine(seq);
}

} // namespace beamwander
