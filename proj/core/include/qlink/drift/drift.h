#pragma once

#include "qlink/util/rng.h"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qlink {

enum class DriftKind { kTiming, kPhase, kFrequency, kPolarization };

std::string to_string(DriftKind kind);
DriftKind drift_kind_from_string(const std::string& s);

// Random walk in the process's natural unit (ps, deg, MHz), time in seconds.
struct DriftProcess {
  DriftKind kind = DriftKind::kTiming;
  double step_std_per_sqrt_s = 0.0;
  double diurnal_amplitude = 0.0;
  double diurnal_period_s = 86400.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// 5 ps per sqrt(minute).
DriftProcess timing_drift_process(std::uint64_t seed);
// Calibrated so a 24 h run typically spans ~100 MHz.
DriftProcess frequency_drift_process(std::uint64_t seed);

struct TimeSeries {
  double dt_s = 1.0;
  std::vector<double> values;

  double duration_s() const { return values.empty() ? 0.0 : dt_s * static_cast<double>(values.size() - 1); }
  double value_at(double t_s) const;  // linear interpolation, clamped
  double span() const;                // max - min
};

TimeSeries simulate_drift(const DriftProcess& p, double duration_s, double dt_s);

struct Histogram {
  std::vector<double> bin_center;
  std::vector<double> probability;
  double bin_width = 0.0;
};

// Fixed-width bins centred on 0. All samples land in a bin (range grows to fit).
Histogram make_histogram(const std::vector<double>& samples, double bin_width);

struct ResidualStats {
  Histogram histogram;
  double mean = 0.0;
  double std = 0.0;
  double bound = 0.0;
  double fraction_within = 0.0;  // |x| <= bound, or x >= bound for overlap statistics
  std::size_t samples = 0;
};

ResidualStats residual_stats(const std::vector<double>& samples, double bound, double bin_width);

// Increments of the series over `window_s` (drift-speed inset data).
std::vector<double> drift_increments(const TimeSeries& series, double window_s);

// Subtracts the value at each correction instant from the following samples.
std::vector<double> sampled_correction_residuals(const TimeSeries& drift, double interval_s);
ResidualStats run_sampled_correction(const TimeSeries& drift, double interval_s, double bound,
                                     double bin_width = 2.0);

// Time-averaged residual std for a random walk corrected every interval.
double sampled_correction_residual_std(double step_std_per_sqrt_s, double interval_s);

struct DesaturationConfig {
  double fast_range_mhz = 10.0;
  double slow_rate_hz = 500.0;
  double slow_range_mhz = 5000.0;
  bool slow_enabled = true;

  void validate() const;
};

struct DesaturationReport {
  std::uint64_t saturation_events = 0;  // samples where the fast actuator is out of range
  std::uint64_t corrections_issued = 0;
  double max_fast_load_mhz = 0.0;
  double drift_span_mhz = 0.0;
  bool slow_saturated = false;
  ResidualStats fast_load;
};

DesaturationReport run_desaturation(const DesaturationConfig& config, const TimeSeries& frequency_mhz);

// Infidelity of an ideal Bell state from the interference-term reduction:
// amplitude overlap of two exponential wavepackets offset by delta is exp(-delta / (2 tau)).
double timing_offset_overlap(double offset_ps, double decay_ns);
double timing_offset_infidelity(double offset_ps, double decay_ns);

// (1 - exp(-sigma^2 / 2)) / 2, sigma in degrees.
double phase_residual_infidelity(double std_deg);

}  // namespace qlink
