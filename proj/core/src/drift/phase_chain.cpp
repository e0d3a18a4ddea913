#include "qlink/drift/phase_chain.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qlink {

double PhaseLoop::effective_bandwidth_hz() const {
  if (error_lowpass_hz > 0.0) {
    return std::min(bandwidth_hz, error_lowpass_hz);
  }
  return bandwidth_hz;
}

double loop_residual_std(const PhaseNoiseSegment& noise, const PhaseLoop& loop) {
  if (!(noise.f_min_hz > 0.0) || !(noise.f_max_hz > noise.f_min_hz)) {
    throw std::invalid_argument("PhaseNoiseSegment: need 0 < f_min < f_max");
  }
  if (noise.random_walk_psd < 0.0 || noise.white_psd < 0.0) {
    throw std::invalid_argument("PhaseNoiseSegment: PSD must be >= 0");
  }
  const double f1 = noise.f_min_hz;
  const double f2 = noise.f_max_hz;
  if (!loop.enabled) {
    const double var = noise.random_walk_psd * (1.0 / f1 - 1.0 / f2) + noise.white_psd * (f2 - f1);
    return std::sqrt(var);
  }
  const double fc = loop.effective_bandwidth_hz();
  if (!(fc > 0.0)) {
    throw std::invalid_argument("PhaseLoop: bandwidth must be > 0");
  }
  // |H|^2 = f^2 / (f^2 + fc^2).
  const double arc = std::atan(f2 / fc) - std::atan(f1 / fc);
  const double var = noise.random_walk_psd * arc / fc + noise.white_psd * ((f2 - f1) - fc * arc);
  return std::sqrt(std::max(0.0, var));
}

PhaseChainResult run_phase_lock_chain(const PhaseChainConfig& config, Rng& rng, std::size_t samples) {
  if (config.loops.size() != config.segments.size()) {
    throw std::invalid_argument("run_phase_lock_chain: one noise segment per loop required");
  }
  if (config.loops.size() != 5) {
    throw std::invalid_argument("run_phase_lock_chain: expected five loops");
  }
  for (const PhaseLoop& l : config.loops) {
    if (!(l.bandwidth_hz > 0.0)) {
      throw std::invalid_argument("run_phase_lock_chain: bandwidths must be > 0");
    }
  }
  PhaseChainResult r;
  double var = config.hold_inflation_deg * config.hold_inflation_deg;
  for (std::size_t i = 0; i < config.loops.size(); ++i) {
    const double s = loop_residual_std(config.segments[i], config.loops[i]);
    r.loop_residual_deg.push_back(s);
    var += s * s;
  }
  r.total_std_deg = std::sqrt(var);
  std::vector<double> draws;
  draws.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    // Wrap into (-180, 180].
    double x = r.total_std_deg > 0.0 ? rng.normal(0.0, r.total_std_deg) : 0.0;
    x = std::remainder(x, 360.0);
    draws.push_back(x);
  }
  r.stats = residual_stats(draws, 180.0, 5.0);
  r.stats.std = r.total_std_deg;
  return r;
}

PhaseChainConfig default_phase_chain(bool heralded) {
  // Target residual share per loop (deg); noise levels are backed out from these.
  struct Spec {
    const char* name;
    double bandwidth_hz;
    double lowpass_hz;
    double residual_deg;
  };
  const Spec specs[5] = {
      {"theta1_local_delft", 5e3, 0.0, 10.0},
      {"theta2_local_hague", 5e3, 0.0, 10.0},
      {"theta3_midpoint_delft", 2e5, 0.0, 15.0},
      {"theta4_midpoint_hague", 2e5, 0.0, 15.0},
      {"theta5_global", 1e3, 150.0, std::sqrt(35.0 * 35.0 - 2 * 100.0 - 2 * 225.0)},
  };
  PhaseChainConfig c;
  for (const Spec& s : specs) {
    PhaseLoop loop;
    loop.name = s.name;
    loop.bandwidth_hz = s.bandwidth_hz;
    loop.error_lowpass_hz = s.lowpass_hz;
    PhaseNoiseSegment seg;
    seg.name = s.name;
    seg.f_min_hz = 0.01;
    seg.f_max_hz = 1e7;
    const double fc = loop.effective_bandwidth_hz();
    const double arc = std::atan(seg.f_max_hz / fc) - std::atan(seg.f_min_hz / fc);
    seg.random_walk_psd = s.residual_deg * s.residual_deg * fc / arc;
    c.loops.push_back(loop);
    c.segments.push_back(seg);
  }
  // Longer free evolution in the heralded sequence: hold bias adds in quadrature.
  c.hold_inflation_deg = heralded ? std::sqrt(45.3 * 45.3 - 35.0 * 35.0) : 0.0;
  return c;
}

}  // namespace qlink
