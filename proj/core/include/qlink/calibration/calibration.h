#pragma once

#include "qlink/model/link_parameters.h"
#include "qlink/util/rng.h"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qlink {

struct CalibrationThresholds {
  double min_cps_tel = 5.0e-6;       // counts per shot, each node
  double min_contrast = 0.58;
  double max_xsweep_err_deg = 15.0;
  std::uint64_t fid_block_cr_checks = 10000;
  // Zero: use the rate captured during SNR.
  double cr_rate_reference = 0.0;

  void validate() const;
};

// 80% of nominal values for the given physics; block size from the protocol.
CalibrationThresholds default_thresholds(const LinkParameters& physics, bool heralded);

struct SnrMeasurement {
  std::array<std::uint64_t, 2> signal_counts{};
  std::array<std::uint64_t, 2> noise_counts{};
  std::uint64_t shots = 0;  // per node and per kind
  std::array<double, 2> cps_signal{};
  std::array<double, 2> cps_noise{};
  double snr = 0.0;  // at the operating alpha
  double snr_err = 0.0;
};

// Bright-state (signal) and pi-rotated (noise) shots per node, windows 100 ns apart.
SnrMeasurement measure_snr(const LinkParameters& physics, std::uint64_t shots, Rng& rng);

struct PhaseFringeOptions {
  double phase_noise_std_deg = 0.0;
  double flux_ratio = 1.0;  // intensity of node B over node A at the midpoint
  double fringe_offset_deg = 0.0;
  std::uint64_t counts_per_point = 0;  // 0: expected values
};

struct PhaseCalibration {
  double contrast = 0.0;  // corrected for flux imbalance
  double contrast_err = 0.0;
  double fringe_phase_deg = 0.0;
  double setpoint_deg = 0.0;  // setpoint at the fringe maximum
  double entangled_phase_deg = 0.0;
  double entangled_phase_err_deg = 0.0;
};

PhaseCalibration measure_phase_fringe(const std::vector<double>& setpoints_deg, const PhaseFringeOptions& options,
                                      Rng& rng);

struct XsweepOptions {
  std::vector<double> angles_deg;  // empty: 0, 30, ..., 330
  std::uint64_t heralds_per_angle = 0;  // 0: expected values
  // Entangled-state phase at optical setpoint zero.
  double entangled_phase_offset_deg = 0.0;
};

struct XsweepResult {
  double entangled_phase_deg = 0.0;
  double entangled_phase_err_deg = 0.0;
  double amplitude = 0.0;
  double amplitude_err = 0.0;
  std::vector<double> angles_deg;
  std::vector<double> correlation;
  std::vector<double> correlation_err;
};

// Delft read in X, The Hague at swept equatorial angles, sign-corrected per detector.
XsweepResult measure_xsweepx(const LinkParameters& physics, double optical_setpoint_deg, const XsweepOptions& options,
                             Rng& rng);

enum class CalibrationStage { kSnr, kPhase, kXsweepX, kFid, kPhaseRecheck, kDone, kAborted };
enum class StageOutcome { kPass, kFail, kBlockComplete, kBreakout, kFinished };

std::string to_string(CalibrationStage s);
std::string to_string(StageOutcome o);

constexpr std::array<CalibrationStage, 7> kAllStages{CalibrationStage::kSnr,          CalibrationStage::kPhase,
                                                     CalibrationStage::kXsweepX,      CalibrationStage::kFid,
                                                     CalibrationStage::kPhaseRecheck, CalibrationStage::kDone,
                                                     CalibrationStage::kAborted};
constexpr std::array<StageOutcome, 5> kAllOutcomes{StageOutcome::kPass, StageOutcome::kFail,
                                                   StageOutcome::kBlockComplete, StageOutcome::kBreakout,
                                                   StageOutcome::kFinished};

CalibrationStage next_stage(CalibrationStage s, StageOutcome o);

struct CrDegradation {
  bool enabled = false;
  std::uint64_t after_cr_checks = 0;  // counted over all FID blocks
  double factor = 0.5;                // pass probability multiplier
};

struct CalibrationConfig {
  CalibrationThresholds thresholds;
  LinkParameters physics;
  bool heralded = true;
  double cr_pass_probability = 0.08;
  std::uint64_t snr_shots = 100000000;
  std::uint64_t snr_cr_checks = 100000;  // CR-rate reference sample
  std::vector<double> fringe_setpoints_deg;  // empty: 0, 20, ..., 340
  PhaseFringeOptions fringe{0.0, 1.0, 0.0, 20000};
  double optical_setpoint_deg = 0.0;
  XsweepOptions xsweep{{}, 400, 0.0};
  int fid_blocks = 3;
  int max_cycles = 5;
  CrDegradation degradation;
  double attempt_success_probability = -1.0;  // < 0: model value
  std::uint64_t seed = 1;
};

struct StageRecord {
  int cycle = 0;
  CalibrationStage stage = CalibrationStage::kSnr;
  StageOutcome outcome = StageOutcome::kPass;
  std::string gate;
  double value = 0.0;
  double threshold = 0.0;
};

struct FidBlock {
  int cycle = 0;
  std::uint64_t cr_checks = 0;
  std::uint64_t cr_passes = 0;
  double cr_rate = 0.0;
  bool breakout = false;
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
  double fidelity = 0.0;  // model fidelity at the residual phase
  double phase_setpoint_deg = 0.0;
  double entangled_phase_deg = 0.0;
  double snr = 0.0;
};

struct CalibrationReport {
  std::vector<StageRecord> stages;
  std::vector<FidBlock> blocks;
  CalibrationStage final_stage = CalibrationStage::kSnr;
  int cycles = 0;
  double cr_rate_reference = 0.0;
  SnrMeasurement snr;
  PhaseCalibration phase;
  XsweepResult xsweep;
};

CalibrationReport run_calibration_cycle(const CalibrationConfig& config);

std::string calibration_report_to_json(const CalibrationReport& report);

}  // namespace qlink
