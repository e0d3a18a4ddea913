#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qlink {

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic child seed from a parent seed and a stream label.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  Rng split(std::string_view label) const;
  Rng split(std::uint64_t index) const;

  double uniform();
  double normal(double mean, double stddev);
  bool bernoulli(double p);
  std::uint64_t binomial(std::uint64_t trials, double p);
  std::uint64_t poisson(double mean);
  // Number of failures before the first success; p in (0, 1].
  std::uint64_t geometric(double p);
  std::size_t categorical(const double* weights, std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace qlink
