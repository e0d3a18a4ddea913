#pragma once

#include "qlink/model/link_parameters.h"
#include "qlink/quantum/readout.h"
#include "qlink/quantum/two_qubit_state.h"
#include "qlink/sim/coherence.h"
#include "qlink/sim/event_log.h"
#include "qlink/sim/topology.h"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qlink {

enum class LinkMode { kPostSelected, kHeralded };

std::string to_string(LinkMode mode);
LinkMode link_mode_from_string(const std::string& s);

struct LinkSimConfig {
  LinkTopology topology;
  NodeSchedule schedule;
  SkewCalibration skew;
  LinkParameters physics;
  CoherenceModel coherence;
  double duration_s = 60.0;
  std::uint64_t seed = 1;
  // Phase of the generated state and the correction fed forward from calibration.
  double state_phase_deg = 0.0;
  double phase_correction_deg = 0.0;
  // Overrides the modelled per-attempt success probability when >= 0.
  double forced_success_probability = -1.0;
  // Keep detailed per-node handshake events for every block.
  bool log_handshake = true;
};

struct HeraldRecord {
  std::uint64_t attempt_index = 0;
  int detector = 0;
  bool dual_click = false;
  TimePs emission_ps = 0;  // herald decision at the midpoint
  std::array<TimePs, 2> pulse_emission_ps{};
  std::array<TimePs, 2> arrival_ps{};
  bool feedforward_applied = false;
  std::size_t delivered_index = 0;
};

struct DeliveredState {
  std::uint64_t herald_index = 0;
  int detector = 0;
  bool feedforward_applied = false;
  int target_sign = -1;
  Pauli basis = Pauli::kZ;
  int outcome = 0;  // 0..3, Delft bit first
  double fidelity = 0.0;
  TwoQubitState state;
};

struct BasisCounts {
  std::array<std::uint64_t, 4> counts{};
  std::uint64_t total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

// Per target branch: detector 1, detector 2.
struct RunSummary {
  std::string mode;
  double duration_s = 0.0;
  std::uint64_t blocks = 0;
  std::uint64_t cr_checks = 0;
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
  std::array<std::uint64_t, 2> successes_per_detector{};
  std::uint64_t dual_clicks = 0;
  std::uint64_t protocol_faults = 0;
  double rate_hz = 0.0;
  double attempt_rate_hz = 0.0;
  double attempt_period_us = 0.0;
  double fidelity = 0.0;  // mean over delivered states
  std::array<double, 2> fidelity_per_detector{};
  // counts[detector][basis X, Y, Z]
  std::array<std::array<BasisCounts, 3>, 2> correlator_counts{};
  std::array<std::array<double, 3>, 2> correlator_raw{};
  std::array<std::array<double, 3>, 2> correlator_corrected{};
  std::array<std::array<double, 3>, 2> correlator_err{};
  std::array<double, 2> measured_fidelity{};
  double measured_fidelity_mean = 0.0;
  std::array<int, 2> target_sign{1, -1};
};

struct RunResult {
  RunSummary summary;
  std::vector<HeraldRecord> heralds;
  std::vector<DeliveredState> delivered;
};

// Accumulates a summary from the event stream; `verify` feeds a recorded log through it.
class SummaryAggregator : public EventSink {
 public:
  void on_event(const Event& e) override;
  RunSummary finish() const;

 private:
  RunSummary s_;
  ReadoutModel readout_;
  double fidelity_sum_ = 0.0;
  std::array<double, 2> fidelity_sum_det_{};
  bool started_ = false;
};

RunSummary summarize_events(const std::vector<Event>& events);

struct HeraldedTiming {
  std::array<TimePs, 2> emission_offset_ps{};
  TimePs midpoint_arrival_ps = 0;  // window start relative to attempt start
  std::array<TimePs, 2> herald_arrival_ps{};
  std::array<TimePs, 2> poll_ps{};
  std::array<double, 2> echo_time_us{};
  std::array<double, 2> contrast{};
  std::array<double, 2> dephasing{};
  TimePs attempt_period_ps = 0;
};

// Timing of one heralded attempt relative to its (heartbeat-aligned) start.
HeraldedTiming heralded_timing(const LinkSimConfig& config);

// Physics with the echo-envelope dephasing used in heralded mode.
LinkParameters heralded_physics(const LinkSimConfig& config);

// Per-attempt herald probability the simulator samples (any detector, dual clicks included).
double attempt_success_probability(LinkMode mode, const LinkSimConfig& config);

// Closed-form attempts per second including CR-check, handshake and stabilization overhead.
double expected_attempt_rate(LinkMode mode, const LinkSimConfig& config, double success_probability);

RunResult run_post_selected(const LinkSimConfig& config, const std::vector<EventSink*>& sinks = {});
RunResult run_heralded(const LinkSimConfig& config, const std::vector<EventSink*>& sinks = {});
RunResult run_link(LinkMode mode, const LinkSimConfig& config, const std::vector<EventSink*>& sinks = {});

std::string summary_to_json(const RunSummary& s);

}  // namespace qlink
