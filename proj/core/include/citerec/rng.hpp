#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace citerec {

// All seeded randomness in the library goes through std::mt19937_64. The
// helpers below replace std::uniform_int_distribution and std::shuffle with
// fixed algorithms, giving identical sequences on every standard library.
using Rng = std::mt19937_64;

// Uniform integer in [0, bound) by rejection sampling. bound must be > 0.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

// Fisher-Yates, iterating i from size-1 down to 1 and swapping with
// uniform_below(rng, i + 1).
template <typename T>
void shuffle_in_place(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over the bytes of text, then mixed with seed through mix64.
std::uint64_t seeded_hash(std::string_view text, std::uint64_t seed);

}  // namespace citerec
