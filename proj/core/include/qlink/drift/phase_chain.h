#pragma once

#include "qlink/drift/drift.h"

#include <string>
#include <vector>

namespace qlink {

// One-sided phase-noise PSD on [f_min, f_max]: rw / f^2 + white, in deg^2/Hz.
struct PhaseNoiseSegment {
  std::string name;
  double random_walk_psd = 0.0;
  double white_psd = 0.0;
  double f_min_hz = 0.01;
  double f_max_hz = 1e6;
};

// First-order loop: residual = input noise through a single-pole high-pass at the
// loop bandwidth. A low-pass on the error signal caps the usable bandwidth.
struct PhaseLoop {
  std::string name;
  double bandwidth_hz = 1e3;
  double error_lowpass_hz = 0.0;  // 0 = none
  bool enabled = true;

  double effective_bandwidth_hz() const;
};

struct PhaseChainConfig {
  std::vector<PhaseNoiseSegment> segments;  // one per loop
  std::vector<PhaseLoop> loops;
  // Added in quadrature, e.g. local-phase hold bias during longer free evolution.
  double hold_inflation_deg = 0.0;
};

struct PhaseChainResult {
  std::vector<double> loop_residual_deg;
  double total_std_deg = 0.0;
  ResidualStats stats;  // sampled residual phase histogram
};

// Residual std of one segment behind a loop of the given effective bandwidth.
double loop_residual_std(const PhaseNoiseSegment& noise, const PhaseLoop& loop);

PhaseChainResult run_phase_lock_chain(const PhaseChainConfig& config, Rng& rng, std::size_t samples = 100000);

// Five loops (theta1..theta5) with noise reverse-calibrated to a 35 deg residual;
// the heralded configuration adds the hold inflation to reach 45.3 deg.
PhaseChainConfig default_phase_chain(bool heralded);

}  // namespace qlink
