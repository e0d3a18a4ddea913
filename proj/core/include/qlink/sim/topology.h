#pragma once

#include "qlink/quantum/two_qubit_state.h"

#include <array>
#include <cstdint>

namespace qlink {

using TimePs = std::int64_t;

constexpr TimePs us_to_ps(double us) { return static_cast<TimePs>(us * 1e6 + (us >= 0 ? 0.5 : -0.5)); }
constexpr double ps_to_us(TimePs ps) { return static_cast<double>(ps) * 1e-6; }
constexpr double ps_to_s(TimePs ps) { return static_cast<double>(ps) * 1e-12; }

struct LinkTopology {
  std::array<double, 2> tof_us{72.655, 51.58};  // one-way, (Delft, The Hague)
  std::array<double, 2> loss_db{13.9, 13.1};
  double heartbeat_us = 10.0;
  double photon_slot_us = 2.0;  // last part of each heartbeat
  double clock_jitter_ps = 0.0;

  void validate() const;
  TimePs tof_ps(Node n) const { return us_to_ps(tof_us[static_cast<int>(n)]); }
  TimePs heartbeat_ps() const { return us_to_ps(heartbeat_us); }
  // Midpoint time-of-arrival target inside the photon slot (slot centre).
  TimePs slot_center_phase_ps() const { return heartbeat_ps() - us_to_ps(photon_slot_us) / 2; }
};

struct NodeSchedule {
  double cr_check_duration_us = 150.0;
  double cr_pass_probability = 0.08;
  int stabilization_heartbeats = 20;
  int rounds_per_block = 540;
  int phase_refresh_cadence = 7;
  double heralded_attempt_period_us = 200.0;  // minimum; extended if timing needs more
  std::array<double, 2> echo_time_us{82.0, 68.0};
  int max_heralded_attempts = 228;
  int hold_heartbeats = 3;  // negative: derive from the topology
  double readout_duration_us = 20.0;
  // Memory dephasing before the echo envelope is applied (heralded mode).
  std::array<double, 2> base_dephasing{0.01, 0.01};

  void validate() const;
};

// Emission offsets from the common sequence start (Delft frame).
struct SkewCalibration {
  std::array<double, 2> calibrated_tof_us{72.655, 51.58};
  double budget_ps = 50.0;
};

struct Alignment {
  std::array<TimePs, 2> emission_offset_ps{};
  int hold_heartbeats = 0;
  TimePs hague_skew_ps = 0;  // sub-heartbeat part of The Hague's delay
  TimePs arrival_ps = 0;     // expected midpoint arrival relative to sequence start
  TimePs misalignment_ps = 0;  // true arrival difference (Delft - The Hague)
  bool within_budget = true;
};

Alignment align_time_of_flight(const LinkTopology& topology, const SkewCalibration& calibration);
inline Alignment align_time_of_flight(const LinkTopology& topology) {
  return align_time_of_flight(topology, SkewCalibration{topology.tof_us, 50.0});
}

// Herald pulse delays so that pulses reach both nodes at the same heartbeat phase.
std::array<TimePs, 2> herald_pulse_delays(const LinkTopology& topology);

}  // namespace qlink
