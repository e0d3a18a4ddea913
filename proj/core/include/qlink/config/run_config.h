#pragma once

#include "qlink/calibration/calibration.h"
#include "qlink/drift/drift.h"
#include "qlink/drift/polarization.h"
#include "qlink/model/link_parameters.h"
#include "qlink/sim/link_simulator.h"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qlink {

struct TimingDriftConfig {
  double step_ps_per_sqrt_s = 5.0 / 7.745966692414834;  // 5 ps per sqrt(minute)
  double correction_interval_s = 900.0;
  double bound_ps = 50.0;
  double duration_s = 86400.0;
  double dt_s = 1.0;
  double bin_ps = 2.0;
};

struct FrequencyDriftConfig {
  double step_mhz_per_sqrt_s = 0.25;
  double duration_s = 86400.0;
  double dt_s = 1.0;
  DesaturationConfig desaturation;
  double bin_mhz = 0.5;
};

struct PhaseDriftConfig {
  double noise_scale = 1.0;  // multiplies every segment PSD
  std::array<bool, 5> loops_enabled{true, true, true, true, true};
  std::uint64_t samples = 100000;
};

struct PolarizationChannelConfig {
  PolarizationDriftConfig drift;
  PolarizationFeedbackConfig feedback;
};

struct DriftConfig {
  TimingDriftConfig timing;
  FrequencyDriftConfig frequency;
  PhaseDriftConfig phase;
  PolarizationChannelConfig polarization;
};

struct RunConfig {
  std::string name = "run";
  LinkMode mode = LinkMode::kHeralded;
  std::uint64_t seed = 1;
  std::string out = "out";
  double duration_s = 600.0;
  LinkTopology topology;
  SkewCalibration skew;
  NodeSchedule schedule;
  std::string physics_preset = "heralded";
  LinkParameters physics = heralded_parameters();
  CoherenceModel coherence;
  // Generated state phase = optical setpoint + offset; the correction is fed forward.
  double optical_setpoint_deg = 0.0;
  double entangled_phase_offset_deg = 0.0;
  double phase_correction_deg = 0.0;
  bool log_handshake = true;
  DriftConfig drift;
  // Physics, protocol, seed, CR pass probability and phase settings come from the run.
  CalibrationConfig calibration;
  std::vector<double> sweep_windows_ns;
  std::string scenario = "measured";

  LinkSimConfig link_sim_config() const;
  CalibrationConfig calibration_config() const;
};

// Unknown keys and type mismatches throw ConfigError as "<source>:<line>: message".
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& config);

}  // namespace qlink
