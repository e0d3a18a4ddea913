#include "qlink/util/rng.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace qlink {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.uniform(), b.uniform());
}

TEST(Rng, SplitIsDeterministicAndLabelled) {
  const Rng root(7);
  Rng a = root.split("cr_check");
  Rng b = root.split("cr_check");
  Rng c = root.split("readout");
  EXPECT_EQ(a.seed(), b.seed());
  EXPECT_NE(a.seed(), c.seed());
  EXPECT_EQ(a.uniform(), b.uniform());
  EXPECT_EQ(derive_seed(7, "x"), derive_seed(7, "x"));
  EXPECT_NE(derive_seed(7, std::uint64_t{0}), derive_seed(7, std::uint64_t{1}));
}

TEST(Rng, UniformInUnitInterval) {
  Rng r(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

// Mean number of failures before success is (1 - p) / p.
TEST(Rng, GeometricMean) {
  Rng r(3);
  const double p = 0.08;
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(r.geometric(p));
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = (1.0 - p) / (p * p);
  EXPECT_NEAR(mean, (1.0 - p) / p, 5.0 * std::sqrt(var / n));
  EXPECT_EQ(r.geometric(1.0), 0u);
}

TEST(Rng, BinomialAndPoissonMoments) {
  Rng r(5);
  const std::uint64_t trials = 1000000;
  const double p = 1e-3;
  double sum = 0.0;
  const int reps = 400;
  for (int i = 0; i < reps; ++i) sum += static_cast<double>(r.binomial(trials, p));
  EXPECT_NEAR(sum / reps, trials * p, 5.0 * std::sqrt(trials * p / reps));
  sum = 0.0;
  for (int i = 0; i < reps; ++i) sum += static_cast<double>(r.poisson(12.5));
  EXPECT_NEAR(sum / reps, 12.5, 5.0 * std::sqrt(12.5 / reps));
}

TEST(Rng, CategoricalFollowsWeights) {
  Rng r(9);
  const double w[3] = {1.0, 0.0, 3.0};
  std::vector<int> hits(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hits[r.categorical(w, 3)];
  EXPECT_EQ(hits[1], 0);
  EXPECT_NEAR(hits[2] / static_cast<double>(n), 0.75, 0.01);
}

}  // namespace
}  // namespace qlink
