#pragma once

#include "qlink/drift/drift.h"

#include <array>
#include <vector>

namespace qlink {

using Stokes = std::array<double, 3>;
using Rotation = std::array<std::array<double, 3>, 3>;

struct PolarizationDriftConfig {
  double diffusion_deg_per_sqrt_s = 3.0;
  double duration_s = 3600.0;
  double dt_s = 0.01;
};

// Fiber rotation history (isotropic Brownian motion on SO(3)).
std::vector<Rotation> simulate_polarization_drift(const PolarizationDriftConfig& config, Rng& rng);

struct PolarizationFeedbackConfig {
  double feedback_rate_hz = 5.0;  // 0 disables feedback
  double dither_deg = 1.0;
  double gain = 2.0;
  double measurement_noise = 0.0;  // std of each overlap measurement
  double target_overlap = 0.95;
  double bin_width = 0.005;
};

struct PolarizationResult {
  ResidualStats overlap;  // fraction_within: share of samples >= target
  double mean_overlap = 0.0;
  double final_overlap = 0.0;
};

// Overlap = (1 + s.p) / 2 with p the polarizer axis (1, 0, 0).
double polarizer_overlap(const Stokes& s);

PolarizationResult run_polarization_feedback(const std::vector<Rotation>& drift, double dt_s,
                                             const PolarizationFeedbackConfig& config, Rng& rng,
                                             const Stokes& input = {1.0, 0.0, 0.0});

Rotation rotation_from_vector(const Stokes& omega_rad);
Rotation compose(const Rotation& a, const Rotation& b);
Stokes apply(const Rotation& r, const Stokes& s);

}  // namespace qlink
