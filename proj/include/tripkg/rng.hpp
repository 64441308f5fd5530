#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace tripkg {

/// Uniform double in [0, 1) from the top 53 bits of one engine output.
/// Pinned to the mt19937_64 sequence, unlike the std distributions.
inline double canonical(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n).
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const auto i = static_cast<std::size_t>(canonical(rng) * double(n));
  return i < n ? i : n - 1;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent seed for a named sub-stream of a base seed.
inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream));
}

/// Walker/Vose alias table for O(1) sampling from a fixed discrete
/// distribution. Two engine draws per sample, fully deterministic.
class AliasSampler {
 public:
  explicit AliasSampler(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("AliasSampler: empty weight vector");
    double total = 0;
    for (double w : weights) {
      if (w < 0) throw std::invalid_argument("AliasSampler: negative weight");
      total += w;
    }
    if (total <= 0) throw std::invalid_argument("AliasSampler: zero total weight");

    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * double(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(std::uint32_t(i));
    }
    while (!small.empty() && !large.empty()) {
      const auto s = small.back();
      const auto l = large.back();
      small.pop_back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (auto i : large) prob_[i] = 1.0;
    for (auto i : small) prob_[i] = 1.0;  // numeric leftovers
  }

  std::size_t sample(std::mt19937_64& rng) const {
    const std::size_t col = uniform_index(rng, prob_.size());
    return canonical(rng) < prob_[col] ? col : alias_[col];
  }

  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace tripkg
