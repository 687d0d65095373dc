#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ballbot {

// splitmix64: cheap, well-distributed seed mixing.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(a ^ mix_seed(b));
}

// Train and eval terrains draw from structurally disjoint seed ranges: bit 62
// marks evaluation seeds, so no training terrain can ever be evaluated on.
inline constexpr std::uint64_t kEvalSeedBit = 1ull << 62;
inline constexpr std::uint64_t kSeedMask = (1ull << 61) - 1;

inline std::uint64_t train_terrain_seed(std::uint64_t run_seed, int env_index,
                                        std::uint64_t episode) {
  return mix_seed(mix_seed(run_seed, static_cast<std::uint64_t>(env_index)), episode) &
         kSeedMask;
}

inline std::uint64_t eval_terrain_seed(std::uint64_t run_seed, int env_index,
                                       std::uint64_t episode) {
  return (mix_seed(mix_seed(~run_seed, static_cast<std::uint64_t>(env_index)), episode) &
          kSeedMask) |
         kEvalSeedBit;
}

// Fisher-Yates pinned to raw mt19937_64 draws; std::shuffle is
// implementation-defined and would break cross-stdlib determinism.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace ballbot
