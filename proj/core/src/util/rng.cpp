#include "qlink/util/rng.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qlink {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  // FNV-1a over the label, then mixed with the parent.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(seed ^ splitmix64(h));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split(std::string_view label) const { return Rng(derive_seed(seed_, label)); }

Rng Rng::split(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

double Rng::uniform() {
  // 53-bit mantissa in [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double stddev) {
  if (stddev == 0.0) {
    return mean;
  }
  std::normal_distribution<double> dist(mean, stddev);
  return dist(engine_);
}

bool Rng::bernoulli(double p) {
  if (p <= 0.0) {
    return false;
  }
  if (p >= 1.0) {
    return true;
  }
  return uniform() < p;
}

std::uint64_t Rng::binomial(std::uint64_t trials, double p) {
  if (trials == 0 || p <= 0.0) {
    return 0;
  }
  if (p >= 1.0) {
    return trials;
  }
  std::binomial_distribution<std::uint64_t> dist(trials, p);
  return dist(engine_);
}

std::uint64_t Rng::poisson(double mean) {
  if (mean <= 0.0) {
    return 0;
  }
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine_);
}

std::uint64_t Rng::geometric(double p) {
  if (p <= 0.0 || p > 1.0) {
    throw std::invalid_argument("geometric: p must be in (0, 1]");
  }
  if (p == 1.0) {
    return 0;
  }
  const double u = 1.0 - uniform();  // (0, 1]
  const double k = std::floor(std::log(u) / std::log1p(-p));
  if (k >= static_cast<double>(std::numeric_limits<std::uint64_t>::max())) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(k);
}

std::size_t Rng::categorical(const double* weights, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += weights[i];
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("categorical: weights must have positive sum");
  }
  double u = uniform() * total;
  for (std::size_t i = 0; i < n; ++i) {
    if (u < weights[i]) {
      return i;
    }
    u -= weights[i];
  }
  for (std::size_t i = n; i > 0; --i) {
    if (weights[i - 1] > 0.0) {
      return i - 1;
    }
  }
  return 0;
}

}  // namespace qlink
