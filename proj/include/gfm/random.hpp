#pragma once
// Deterministic pseudo-random streams for the randomized builders.
//
// Reproducibility contract: a stream is identified by its seed, and
// child(key) derives a new stream from the seed alone.  The value a consumer
// draws therefore never depends on how many values other consumers drew, and
// a third party holding the root seed can re-derive any draw after the fact.

#include <cstdint>
#include <span>
#include <stdexcept>

namespace gfm {

namespace detail {

// SplitMix64 step (Steele, Lea and Flood's generator).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Collapses a (seed, key) pair into one well-mixed word.
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a;
  std::uint64_t t = splitmix64(s) ^ b;
  return splitmix64(t);
}

}  // namespace detail

class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next() { return detail::splitmix64(state_); }

  // Derived stream; determined by this stream's seed and the key only.
  RandomSource child(std::uint64_t key) const {
    return RandomSource(detail::mix(seed_, key));
  }

  // Uniform draw from [0, bound) by rejection sampling.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("below: bound must be positive");
    std::uint64_t threshold = (std::uint64_t{0} - bound) % bound;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

namespace detail {

// Binomial coefficient in 128-bit arithmetic; exact at every step.
inline unsigned __int128 binom128(int n, int k) {
  if (k < 0 || k > n) return 0;
  unsigned __int128 c = 1;
  for (int j = 1; j <= k; ++j)
    c = c * static_cast<unsigned>(n - k + j) / static_cast<unsigned>(j);
  return c;
}

}  // namespace detail

// Rank of a strictly increasing tuple in colexicographic order.  The ranks
// of all increasing k-tuples over [0, n) fill [0, C(n, k)) exactly, so the
// rank doubles as a dense storage index.
inline std::uint64_t colex_rank(std::span<const int> tuple) {
  unsigned __int128 rank = 0;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i > 0 && tuple[i] <= tuple[i - 1])
      throw std::invalid_argument("colex_rank: tuple must be strictly increasing");
    rank += detail::binom128(tuple[i], static_cast<int>(i) + 1);
  }
  if (rank > static_cast<unsigned __int128>(~std::uint64_t{0}))
    throw std::overflow_error("colex_rank: rank exceeds 64 bits");
  return static_cast<std::uint64_t>(rank);
}

}  // namespace gfm
