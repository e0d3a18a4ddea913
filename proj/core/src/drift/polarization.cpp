#include "qlink/drift/polarization.h"

#include "qlink/util/cosine_fit.h"

#include <cmath>
#include <stdexcept>

namespace qlink {

Rotation rotation_from_vector(const Stokes& w) {
  const double angle = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
  Rotation r{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  if (angle == 0.0) {
    return r;
  }
  const double x = w[0] / angle;
  const double y = w[1] / angle;
  const double z = w[2] / angle;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double t = 1.0 - c;
  r = {{{t * x * x + c, t * x * y - s * z, t * x * z + s * y},
        {t * x * y + s * z, t * y * y + c, t * y * z - s * x},
        {t * x * z - s * y, t * y * z + s * x, t * z * z + c}}};
  return r;
}

Rotation compose(const Rotation& a, const Rotation& b) {
  Rotation r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double v = 0.0;
      for (int k = 0; k < 3; ++k) {
        v += a[i][k] * b[k][j];
      }
      r[i][j] = v;
    }
  }
  return r;
}

Stokes apply(const Rotation& r, const Stokes& s) {
  Stokes out{};
  for (int i = 0; i < 3; ++i) {
    out[i] = r[i][0] * s[0] + r[i][1] * s[1] + r[i][2] * s[2];
  }
  return out;
}

double polarizer_overlap(const Stokes& s) { return 0.5 * (1.0 + s[0]); }

std::vector<Rotation> simulate_polarization_drift(const PolarizationDriftConfig& config, Rng& rng) {
  if (!(config.duration_s > 0.0) || !(config.dt_s > 0.0) || config.diffusion_deg_per_sqrt_s < 0.0) {
    throw std::invalid_argument("simulate_polarization_drift: invalid configuration");
  }
  const auto n = static_cast<std::size_t>(std::floor(config.duration_s / config.dt_s + 1e-9)) + 1;
  const double step = deg_to_rad(config.diffusion_deg_per_sqrt_s) * std::sqrt(config.dt_s);
  std::vector<Rotation> out;
  out.reserve(n);
  Rotation r = rotation_from_vector({0.0, 0.0, 0.0});
  out.push_back(r);
  for (std::size_t i = 1; i < n; ++i) {
    const Stokes w{rng.normal(0.0, step), rng.normal(0.0, step), rng.normal(0.0, step)};
    r = compose(rotation_from_vector(w), r);
    out.push_back(r);
  }
  return out;
}

PolarizationResult run_polarization_feedback(const std::vector<Rotation>& drift, double dt_s,
                                             const PolarizationFeedbackConfig& config, Rng& rng,
                                             const Stokes& input) {
  if (!(dt_s > 0.0) || config.feedback_rate_hz < 0.0) {
    throw std::invalid_argument("run_polarization_feedback: invalid configuration");
  }
  Rotation comp = rotation_from_vector({0.0, 0.0, 0.0});
  const double dither = deg_to_rad(config.dither_deg);
  const double period = config.feedback_rate_hz > 0.0 ? 1.0 / config.feedback_rate_hz : 0.0;
  double next_update = period;
  auto measure = [&](const Stokes& s) {
    return polarizer_overlap(s) + (config.measurement_noise > 0.0 ? rng.normal(0.0, config.measurement_noise) : 0.0);
  };

  std::vector<double> overlaps;
  overlaps.reserve(drift.size());
  std::size_t above = 0;
  for (std::size_t i = 0; i < drift.size(); ++i) {
    const double t = dt_s * static_cast<double>(i);
    const Stokes fiber = apply(drift[i], input);
    if (period > 0.0 && t + 1e-12 >= next_update) {
      // Dither the compensator about the two axes orthogonal to the polarizer.
      double grad[2] = {0.0, 0.0};
      for (int axis = 0; axis < 2; ++axis) {
        Stokes w{0.0, 0.0, 0.0};
        w[axis + 1] = dither;
        const double up = measure(apply(compose(rotation_from_vector(w), comp), fiber));
        w[axis + 1] = -dither;
        const double down = measure(apply(compose(rotation_from_vector(w), comp), fiber));
        grad[axis] = (up - down) / (2.0 * dither);
      }
      const Stokes step{0.0, config.gain * grad[0], config.gain * grad[1]};
      comp = compose(rotation_from_vector(step), comp);
      next_update += period;
    }
    const double o = polarizer_overlap(apply(comp, fiber));
    overlaps.push_back(o);
    if (o >= config.target_overlap) {
      ++above;
    }
  }
  PolarizationResult r;
  r.overlap = residual_stats(overlaps, 1.0, config.bin_width);
  r.overlap.bound = config.target_overlap;
  r.overlap.fraction_within = overlaps.empty() ? 0.0 : static_cast<double>(above) / static_cast<double>(overlaps.size());
  r.mean_overlap = r.overlap.mean;
  r.final_overlap = overlaps.empty() ? 0.0 : overlaps.back();
  return r;
}

}  // namespace qlink
