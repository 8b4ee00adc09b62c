#pragma once

#include <cstdint>
#include <random>

namespace levybdsde {

// Tags separating the independent noise sources drawn from one user seed.
enum class Stream : std::uint32_t { brownian = 1, levy = 2, forward = 3, sampling = 4 };

// Deterministic, independent generator for (seed, stream, index...). The same
// arguments always yield the same sequence regardless of thread scheduling.
inline std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t index,
                                std::uint64_t sub_index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), static_cast<std::uint32_t>(sub_index),
                    static_cast<std::uint32_t>(sub_index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace levybdsde
