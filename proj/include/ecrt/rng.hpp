#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "ecrt/common.hpp"

namespace ecrt {

// splitmix64 step: the mixing primitive behind all seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

// FNV-1a over bytes; used for stream tags and checkpoint tensor hashes.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(std::string_view s);

// Derives independent child seeds from one root so that every consumer
// (data generation, init, batching, augmentation, ...) gets its own stream
// and adding a consumer never shifts the draws of another.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t root) : root_(root) {}

  std::uint64_t root() const { return root_; }

  std::uint64_t derive(std::string_view tag, std::uint64_t counter = 0) const {
    std::uint64_t h = splitmix64(root_ ^ fnv1a64(tag));
    return splitmix64(h + 0x9e3779b97f4a7c15ull * (counter + 1));
  }

  SeedStream child(std::string_view tag, std::uint64_t counter = 0) const {
    return SeedStream(derive(tag, counter));
  }

 private:
  std::uint64_t root_;
};

// Buffered generator wrapper. Same build + same seed -> identical draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(gen_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> d(mean, stddev);
    return d(gen_);
  }

  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n) {
    if (n == 0) throw UsageError("Rng::below: n must be positive");
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(gen_);
  }

  bool bernoulli(double p) {
    std::bernoulli_distribution d(p);
    return d(gen_);
  }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = below(i);
      std::swap(p[i - 1], p[j]);
    }
    return p;
  }

  std::mt19937_64& raw() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ecrt
