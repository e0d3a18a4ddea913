#include "qlink/util/cosine_fit.h"
#include "qlink/util/errors.h"
#include "qlink/util/rng.h"

#include <gtest/gtest.h>

#include <cmath>

namespace qlink {
namespace {

double angle_diff(double a, double b) {
  const double d = wrap_degrees(a - b);
  return d > 180.0 ? 360.0 - d : d;
}

TEST(CosineFit, WrapDegrees) {
  EXPECT_DOUBLE_EQ(wrap_degrees(-10.0), 350.0);
  EXPECT_DOUBLE_EQ(wrap_degrees(720.0), 0.0);
  EXPECT_DOUBLE_EQ(wrap_degrees(359.5), 359.5);
}

TEST(CosineFit, RecoversNoiselessFringes) {
  for (double phase : {0.0, 37.0, 123.4, 271.9, 359.0}) {
    std::vector<double> x, y;
    for (int k = 0; k < 12; ++k) {
      x.push_back(30.0 * k);
      y.push_back(0.1 + 0.7 * std::cos(deg_to_rad(x.back() - phase)));
    }
    const CosineFit f = fit_cosine(x, y);
    EXPECT_LT(angle_diff(f.phase_deg, phase), 0.5) << phase;
    EXPECT_NEAR(f.amplitude, 0.7, 0.007);
    EXPECT_NEAR(f.offset, 0.1, 1e-9);
  }
}

// The reported phase error should match the scatter of repeated fits.
TEST(CosineFit, PhaseErrorIsCalibrated) {
  Rng rng(11);
  const double sigma = 0.05;
  std::vector<double> pulls;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x, y, s;
    for (int k = 0; k < 18; ++k) {
      x.push_back(20.0 * k);
      y.push_back(0.6 * std::cos(deg_to_rad(x.back() - 80.0)) + rng.normal(0.0, sigma));
      s.push_back(sigma);
    }
    const CosineFit f = fit_cosine(x, y, s);
    double d = f.phase_deg - 80.0;
    if (d > 180.0) d -= 360.0;
    pulls.push_back(d / f.phase_err_deg);
  }
  double m2 = 0.0;
  for (double p : pulls) m2 += p * p;
  const double rms = std::sqrt(m2 / pulls.size());
  EXPECT_GT(rms, 0.85);
  EXPECT_LT(rms, 1.15);
}

TEST(CosineFit, RejectsTooFewAngles) {
  EXPECT_THROW(fit_cosine({0.0, 90.0}, {1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(fit_cosine({0.0, 0.0, 360.0}, {1.0, 1.0, 1.0}), std::invalid_argument);
}

}  // namespace
}  // namespace qlink
