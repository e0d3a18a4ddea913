#include "qlink/sim/topology.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qlink {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

TimePs floor_mod(TimePs a, TimePs m) {
  TimePs r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

void LinkTopology::validate() const {
  for (int j = 0; j < 2; ++j) {
    require(std::isfinite(tof_us[j]) && tof_us[j] > 0.0, "LinkTopology: time of flight must be > 0");
    require(std::isfinite(loss_db[j]) && loss_db[j] >= 0.0, "LinkTopology: loss must be >= 0 dB");
  }
  require(std::isfinite(heartbeat_us) && heartbeat_us > 0.0, "LinkTopology: heartbeat must be > 0");
  require(photon_slot_us > 0.0 && photon_slot_us <= heartbeat_us,
          "LinkTopology: photon slot must fit inside the heartbeat");
  require(std::isfinite(clock_jitter_ps) && clock_jitter_ps >= 0.0, "LinkTopology: clock jitter must be >= 0");
}

void NodeSchedule::validate() const {
  require(cr_check_duration_us > 0.0, "NodeSchedule: CR-check duration must be > 0");
  require(cr_pass_probability > 0.0 && cr_pass_probability <= 1.0,
          "NodeSchedule: CR-check pass probability must be in (0, 1]");
  require(stabilization_heartbeats >= 0, "NodeSchedule: stabilization heartbeats must be >= 0");
  require(rounds_per_block >= 1, "NodeSchedule: rounds per block must be >= 1");
  require(phase_refresh_cadence >= 1, "NodeSchedule: phase refresh cadence must be >= 1");
  require(heralded_attempt_period_us > 0.0, "NodeSchedule: heralded attempt period must be > 0");
  require(max_heralded_attempts >= 1, "NodeSchedule: max heralded attempts must be >= 1");
  require(readout_duration_us >= 0.0, "NodeSchedule: readout duration must be >= 0");
  for (int j = 0; j < 2; ++j) {
    require(echo_time_us[j] > 0.0, "NodeSchedule: echo times must be > 0");
    require(base_dephasing[j] >= 0.0 && base_dephasing[j] <= 1.0, "NodeSchedule: base dephasing must be in [0, 1]");
  }
}

Alignment align_time_of_flight(const LinkTopology& topology, const SkewCalibration& calibration) {
  topology.validate();
  const TimePs hb = topology.heartbeat_ps();
  const TimePs cal_d = us_to_ps(calibration.calibrated_tof_us[0]);
  const TimePs cal_h = us_to_ps(calibration.calibrated_tof_us[1]);
  require(cal_d > 0 && cal_h > 0, "align_time_of_flight: calibrated time of flight must be > 0");

  Alignment a;
  const TimePs delta = cal_d - cal_h;
  a.hold_heartbeats = delta > 0 ? static_cast<int>((delta + hb - 1) / hb) : 0;
  a.hague_skew_ps = delta - a.hold_heartbeats * hb;

  TimePs e_d = floor_mod(topology.slot_center_phase_ps() - cal_d, hb);
  TimePs e_h = e_d + delta;
  // The Hague farther away: push both starts forward by whole heartbeats.
  while (e_h < 0) {
    e_d += hb;
    e_h += hb;
  }
  a.emission_offset_ps = {e_d, e_h};
  a.arrival_ps = e_d + cal_d;

  const TimePs arr_d = e_d + topology.tof_ps(Node::kDelft);
  const TimePs arr_h = e_h + topology.tof_ps(Node::kHague);
  a.misalignment_ps = arr_d - arr_h;
  a.within_budget = std::abs(static_cast<double>(a.misalignment_ps)) <= calibration.budget_ps;
  return a;
}

std::array<TimePs, 2> herald_pulse_delays(const LinkTopology& topology) {
  const TimePs hb = topology.heartbeat_ps();
  const TimePs d = topology.tof_ps(Node::kDelft) - topology.tof_ps(Node::kHague);
  if (d >= 0) return {0, floor_mod(d, hb)};
  return {floor_mod(-d, hb), 0};
}

}  // namespace qlink
