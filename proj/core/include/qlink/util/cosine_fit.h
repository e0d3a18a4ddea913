#pragma once

#include <vector>

namespace qlink {

// y = offset + amplitude * cos(x - phase), x in degrees.
struct CosineFit {
  double amplitude = 0.0;
  double phase_deg = 0.0;  // wrapped to [0, 360)
  double offset = 0.0;
  double amplitude_err = 0.0;
  double phase_err_deg = 0.0;
  double residual_std = 0.0;
};

// Linear least squares on (cos x, sin x, 1). Requires >= 3 distinct angles.
CosineFit fit_cosine(const std::vector<double>& x_deg, const std::vector<double>& y,
                     const std::vector<double>& sigma = {});

double wrap_degrees(double deg);
double deg_to_rad(double deg);
double rad_to_deg(double rad);

}  // namespace qlink
