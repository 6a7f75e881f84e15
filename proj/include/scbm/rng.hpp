#pragma once

// Seeded randomness used across generation and inference. std::mt19937_64 has
// a standardized output sequence; distributions are implemented here instead
// of using <random>'s, whose outputs differ between standard libraries.

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace scbm {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stable order-dependent combination of seed components.
constexpr std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x243F6A8885A308D3ULL;
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n), n > 0, by rejection (no modulo bias).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

/// Sampling proportional to nonnegative weights via cumulative sums.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> weights) {
    cumulative_.reserve(weights.size());
    double acc = 0.0;
    for (double w : weights) {
      acc += w;
      cumulative_.push_back(acc);
    }
  }
  bool empty() const noexcept { return cumulative_.empty() || cumulative_.back() <= 0.0; }
  std::size_t operator()(Rng& rng) const {
    const double u = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

}  // namespace scbm
