#include "qlink/drift/drift.h"

#include "qlink/util/cosine_fit.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qlink {

std::string to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::kTiming:
      return "timing";
    case DriftKind::kPhase:
      return "phase";
    case DriftKind::kFrequency:
      return "frequency";
    case DriftKind::kPolarization:
      return "polarization";
  }
  return "unknown";
}

DriftKind drift_kind_from_string(const std::string& s) {
  if (s == "timing") {
    return DriftKind::kTiming;
  }
  if (s == "phase") {
    return DriftKind::kPhase;
  }
  if (s == "frequency") {
    return DriftKind::kFrequency;
  }
  if (s == "polarization") {
    return DriftKind::kPolarization;
  }
  throw std::invalid_argument("unknown drift channel: " + s);
}

void DriftProcess::validate() const {
  if (!(step_std_per_sqrt_s >= 0.0) || !std::isfinite(step_std_per_sqrt_s)) {
    throw std::invalid_argument("DriftProcess: step std must be >= 0");
  }
  if (!(diurnal_period_s > 0.0)) {
    throw std::invalid_argument("DriftProcess: diurnal period must be > 0");
  }
}

DriftProcess timing_drift_process(std::uint64_t seed) {
  DriftProcess p;
  p.kind = DriftKind::kTiming;
  p.step_std_per_sqrt_s = 5.0 / std::sqrt(60.0);
  p.seed = seed;
  return p;
}

DriftProcess frequency_drift_process(std::uint64_t seed) {
  DriftProcess p;
  p.kind = DriftKind::kFrequency;
  p.step_std_per_sqrt_s = 0.25;
  p.seed = seed;
  return p;
}

double TimeSeries::value_at(double t_s) const {
  if (values.empty()) {
    return 0.0;
  }
  if (t_s <= 0.0) {
    return values.front();
  }
  const double x = t_s / dt_s;
  const auto i = static_cast<std::size_t>(std::floor(x));
  if (i + 1 >= values.size()) {
    return values.back();
  }
  const double f = x - static_cast<double>(i);
  return values[i] + f * (values[i + 1] - values[i]);
}

double TimeSeries::span() const {
  if (values.empty()) {
    return 0.0;
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

TimeSeries simulate_drift(const DriftProcess& p, double duration_s, double dt_s) {
  p.validate();
  if (!(duration_s > 0.0) || !(dt_s > 0.0)) {
    throw std::invalid_argument("simulate_drift: duration and dt must be > 0");
  }
  Rng rng(p.seed);
  const auto n = static_cast<std::size_t>(std::floor(duration_s / dt_s + 1e-9)) + 1;
  TimeSeries ts;
  ts.dt_s = dt_s;
  ts.values.resize(n);
  const double step = p.step_std_per_sqrt_s * std::sqrt(dt_s);
  double walk = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      walk += rng.normal(0.0, step);
    }
    const double t = dt_s * static_cast<double>(i);
    const double diurnal =
        p.diurnal_amplitude * std::sin(2.0 * std::numbers::pi * t / p.diurnal_period_s);
    ts.values[i] = walk + diurnal;
  }
  return ts;
}

Histogram make_histogram(const std::vector<double>& samples, double bin_width) {
  if (!(bin_width > 0.0)) {
    throw std::invalid_argument("make_histogram: bin width must be > 0");
  }
  Histogram h;
  h.bin_width = bin_width;
  if (samples.empty()) {
    return h;
  }
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const auto lo = static_cast<long long>(std::floor(*lo_it / bin_width + 0.5));
  const auto hi = static_cast<long long>(std::floor(*hi_it / bin_width + 0.5));
  const auto nbins = static_cast<std::size_t>(hi - lo + 1);
  std::vector<double> counts(nbins, 0.0);
  for (const double x : samples) {
    const auto k = static_cast<long long>(std::floor(x / bin_width + 0.5)) - lo;
    counts[static_cast<std::size_t>(k)] += 1.0;
  }
  const double total = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < nbins; ++i) {
    h.bin_center.push_back(static_cast<double>(lo + static_cast<long long>(i)) * bin_width);
    h.probability.push_back(counts[i] / total);
  }
  return h;
}

ResidualStats residual_stats(const std::vector<double>& samples, double bound, double bin_width) {
  ResidualStats s;
  s.bound = bound;
  s.samples = samples.size();
  s.histogram = make_histogram(samples, bin_width);
  if (samples.empty()) {
    return s;
  }
  double sum = 0.0;
  std::size_t within = 0;
  for (const double x : samples) {
    sum += x;
    if (std::abs(x) <= bound) {
      ++within;
    }
  }
  s.mean = sum / static_cast<double>(samples.size());
  double var = 0.0;
  for (const double x : samples) {
    var += (x - s.mean) * (x - s.mean);
  }
  s.std = std::sqrt(var / static_cast<double>(samples.size()));
  s.fraction_within = static_cast<double>(within) / static_cast<double>(samples.size());
  return s;
}

std::vector<double> drift_increments(const TimeSeries& series, double window_s) {
  if (!(window_s > 0.0)) {
    throw std::invalid_argument("drift_increments: window must be > 0");
  }
  const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window_s / series.dt_s)));
  std::vector<double> out;
  for (std::size_t i = stride; i < series.values.size(); i += stride) {
    out.push_back(series.values[i] - series.values[i - stride]);
  }
  return out;
}

std::vector<double> sampled_correction_residuals(const TimeSeries& drift, double interval_s) {
  if (!(interval_s > 0.0)) {
    throw std::invalid_argument("run_sampled_correction: interval must be > 0");
  }
  std::vector<double> residuals;
  residuals.reserve(drift.values.size());
  double correction = drift.values.empty() ? 0.0 : drift.values.front();
  double next = interval_s;
  for (std::size_t i = 0; i < drift.values.size(); ++i) {
    const double t = drift.dt_s * static_cast<double>(i);
    if (t + 1e-9 >= next) {
      correction = drift.values[i];
      while (next <= t + 1e-9) {
        next += interval_s;
      }
    }
    residuals.push_back(drift.values[i] - correction);
  }
  return residuals;
}

ResidualStats run_sampled_correction(const TimeSeries& drift, double interval_s, double bound, double bin_width) {
  return residual_stats(sampled_correction_residuals(drift, interval_s), bound, bin_width);
}

double sampled_correction_residual_std(double step_std_per_sqrt_s, double interval_s) {
  // E[(W(t) - W(0))^2] = s^2 t, averaged over t uniform on [0, interval).
  return step_std_per_sqrt_s * std::sqrt(interval_s / 2.0);
}

void DesaturationConfig::validate() const {
  if (!(fast_range_mhz > 0.0) || !(slow_range_mhz > 0.0)) {
    throw std::invalid_argument("DesaturationConfig: ranges must be > 0");
  }
  if (slow_enabled && !(slow_rate_hz > 0.0)) {
    throw std::invalid_argument("DesaturationConfig: slow loop rate must be > 0");
  }
}

DesaturationReport run_desaturation(const DesaturationConfig& config, const TimeSeries& frequency_mhz) {
  config.validate();
  DesaturationReport r;
  r.drift_span_mhz = frequency_mhz.span();
  std::vector<double> loads;
  loads.reserve(frequency_mhz.values.size());
  const double origin = frequency_mhz.values.empty() ? 0.0 : frequency_mhz.values.front();
  double slow = 0.0;
  const double period = config.slow_enabled ? 1.0 / config.slow_rate_hz : 0.0;
  std::uint64_t update = 1;
  for (std::size_t i = 0; i < frequency_mhz.values.size(); ++i) {
    const double t = frequency_mhz.dt_s * static_cast<double>(i);
    if (config.slow_enabled) {
      // Slow loop offloads whatever the fast actuator holds at each update instant.
      while (static_cast<double>(update) * period <= t + 1e-12) {
        const double held = frequency_mhz.value_at(static_cast<double>(update) * period) - origin - slow;
        if (std::abs(held) > 1e-12) {
          const double target = std::clamp(slow + held, -config.slow_range_mhz, config.slow_range_mhz);
          if (target != slow + held) {
            r.slow_saturated = true;
          }
          slow = target;
          ++r.corrections_issued;
        }
        ++update;
      }
    }
    const double load = frequency_mhz.values[i] - origin - slow;
    loads.push_back(load);
    r.max_fast_load_mhz = std::max(r.max_fast_load_mhz, std::abs(load));
    if (std::abs(load) > config.fast_range_mhz) {
      ++r.saturation_events;
    }
  }
  r.fast_load = residual_stats(loads, config.fast_range_mhz, std::max(config.fast_range_mhz / 50.0, 1e-6));
  return r;
}

double timing_offset_overlap(double offset_ps, double decay_ns) {
  if (offset_ps < 0.0) {
    throw std::invalid_argument("timing_offset_overlap: offset must be >= 0");
  }
  if (!(decay_ns > 0.0)) {
    throw std::invalid_argument("timing_offset_overlap: decay must be > 0");
  }
  return std::exp(-(offset_ps * 1e-3) / (2.0 * decay_ns));
}

double timing_offset_infidelity(double offset_ps, double decay_ns) {
  return 0.5 * (1.0 - timing_offset_overlap(offset_ps, decay_ns));
}

double phase_residual_infidelity(double std_deg) {
  if (std_deg < 0.0) {
    throw std::invalid_argument("phase_residual_infidelity: std must be >= 0");
  }
  const double s = deg_to_rad(std_deg);
  return 0.5 * (1.0 - std::exp(-0.5 * s * s));
}

}  // namespace qlink
