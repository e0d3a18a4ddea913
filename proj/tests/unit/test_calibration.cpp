#include "qlink/calibration/calibration.h"
#include "qlink/model/single_click.h"
#include "qlink/util/cosine_fit.h"
#include "qlink/util/errors.h"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <set>

namespace qlink {
namespace {

double angle_between(double a, double b) {
  const double d = wrap_degrees(a - b);
  return d > 180.0 ? 360.0 - d : d;
}

std::vector<double> every(double step) {
  std::vector<double> v;
  for (double x = 0.0; x < 360.0; x += step) v.push_back(x);
  return v;
}

TEST(Snr, ZeroBackgroundHasNoNoiseCounts) {
  LinkParameters p = heralded_parameters();
  p.background_rate_hz = {0.0, 0.0};
  Rng rng(1);
  const SnrMeasurement m = measure_snr(p, 1000000, rng);
  EXPECT_EQ(m.noise_counts[0], 0u);
  EXPECT_EQ(m.noise_counts[1], 0u);
  EXPECT_TRUE(std::isinf(m.snr));
}

TEST(Snr, ConsistentWithModel) {
  const LinkParameters p = heralded_parameters();
  Rng rng(2);
  const SnrMeasurement m = measure_snr(p, 100000000, rng);
  EXPECT_LT(std::abs(m.snr - snr(p)), 3.0 * m.snr_err);
  // Bright-state counts per shot, background subtracted, equal the detection probability.
  for (int j = 0; j < 2; ++j) {
    const double cps = m.cps_signal[j] - m.cps_noise[j];
    const double err = std::sqrt((m.cps_signal[j] + m.cps_noise[j]) / static_cast<double>(m.shots));
    EXPECT_LT(std::abs(cps - p.detection_probability[j]), 3.0 * err) << j;
  }
}

TEST(PhaseFringe, NoiselessContrastAndShift) {
  Rng rng(3);
  PhaseFringeOptions o;
  const PhaseCalibration a = measure_phase_fringe(every(20.0), o, rng);
  EXPECT_NEAR(a.contrast, 1.0, 0.01);
  o.fringe_offset_deg = 180.0;
  const PhaseCalibration b = measure_phase_fringe(every(20.0), o, rng);
  EXPECT_NEAR(angle_between(a.fringe_phase_deg, b.fringe_phase_deg), 180.0, 1e-9);
  EXPECT_GE(a.fringe_phase_deg, 0.0);
  EXPECT_LT(a.fringe_phase_deg, 360.0);
}

TEST(PhaseFringe, PhaseNoiseReducesContrast) {
  Rng rng(4);
  PhaseFringeOptions o;
  o.phase_noise_std_deg = 45.3;
  o.counts_per_point = 20000;
  const double s = 45.3 * M_PI / 180.0;
  EXPECT_NEAR(measure_phase_fringe(every(20.0), o, rng).contrast, std::exp(-0.5 * s * s), 0.05);
}

TEST(PhaseFringe, FluxImbalanceIsCorrected) {
  Rng rng(5);
  PhaseFringeOptions o;
  o.flux_ratio = 4.0;
  EXPECT_NEAR(measure_phase_fringe(every(30.0), o, rng).contrast, 1.0, 0.01);
}

TEST(PhaseFringe, RejectsPoorCoverage) {
  Rng rng(6);
  EXPECT_THROW(measure_phase_fringe({0, 45, 90, 135, 180, 225, 270}, {}, rng), ConfigError);
  EXPECT_THROW(measure_phase_fringe({0, 10, 20, 30, 40, 50, 60, 70, 80, 90}, {}, rng), ConfigError);
}

TEST(Xsweep, HalfTurnSetpointsDifferByHalfTurn) {
  const LinkParameters p = heralded_parameters();
  XsweepOptions o;
  o.heralds_per_angle = 2000;
  o.entangled_phase_offset_deg = 219.0;
  Rng rng(7);
  const XsweepResult a = measure_xsweepx(p, 0.0, o, rng);
  const XsweepResult b = measure_xsweepx(p, 180.0, o, rng);
  const double sigma = std::hypot(a.entangled_phase_err_deg, b.entangled_phase_err_deg);
  EXPECT_LT(std::abs(angle_between(a.entangled_phase_deg, b.entangled_phase_deg) - 180.0), 2.0 * sigma);
  EXPECT_LT(angle_between(a.entangled_phase_deg, 219.0), 3.0 * a.entangled_phase_err_deg);
}

// Pure-state limit: the oscillation amplitude is the |01><10| coherence, 1 - alpha.
TEST(Xsweep, NoiselessAmplitudeIsCoherence) {
  LinkParameters p = heralded_parameters();
  p.alpha = {0.1, 0.1};
  p.detection_probability = {1e-5, 1e-5};
  p.background_rate_hz = {0.0, 0.0};
  p.double_excitation = {0.0, 0.0};
  p.phase_noise_std_deg = 0.0;
  p.dephasing = {0.0, 0.0};
  p.spectral_diffusion_fwhm_mhz = 0.0;
  p.mode_overlap = 1.0;
  p.rabi_angle_deg = 180.0;
  p.ionization = {0.0, 0.0};
  p.ssro_fidelity = {1.0, 1.0};
  Rng rng(8);
  const XsweepResult r = measure_xsweepx(p, 0.0, {}, rng);
  EXPECT_NEAR(r.amplitude, 0.9, 1e-3);
  EXPECT_LT(angle_between(r.entangled_phase_deg, 0.0), 1e-6);
}

TEST(Xsweep, FittedPhaseMaximizesFidelity) {
  const LinkParameters p = heralded_parameters();
  XsweepOptions o;
  o.entangled_phase_offset_deg = 37.0;
  Rng rng(9);
  const XsweepResult r = measure_xsweepx(p, 10.0, o, rng);
  const HeraldedOutcome out = heralded_state(p, 47.0);
  double best = -1.0, best_phase = 0.0;
  for (double psi = 0.0; psi < 360.0; psi += 1.0) {
    const double f = 0.5 * (bell_fidelity(out.state[0], 1, psi) + bell_fidelity(out.state[1], -1, psi));
    if (f > best) {
      best = f;
      best_phase = psi;
    }
  }
  EXPECT_LE(angle_between(best_phase, r.entangled_phase_deg), 1.0);
}

TEST(CalibrationMachine, TransitionsAreExhaustive) {
  std::set<std::string> names;
  for (CalibrationStage s : kAllStages) {
    names.insert(to_string(s));
    for (StageOutcome o : kAllOutcomes) {
      const CalibrationStage n = next_stage(s, o);
      EXPECT_NE(std::find(kAllStages.begin(), kAllStages.end(), n), kAllStages.end());
      EXPECT_NE(to_string(o), "?");
    }
  }
  EXPECT_EQ(names.size(), kAllStages.size());
  using S = CalibrationStage;
  using O = StageOutcome;
  EXPECT_EQ(next_stage(S::kSnr, O::kPass), S::kPhase);
  EXPECT_EQ(next_stage(S::kPhase, O::kPass), S::kXsweepX);
  EXPECT_EQ(next_stage(S::kXsweepX, O::kPass), S::kFid);
  EXPECT_EQ(next_stage(S::kFid, O::kBlockComplete), S::kFid);
  EXPECT_EQ(next_stage(S::kFid, O::kBreakout), S::kSnr);
  EXPECT_EQ(next_stage(S::kFid, O::kFinished), S::kPhaseRecheck);
  EXPECT_EQ(next_stage(S::kPhaseRecheck, O::kPass), S::kDone);
  EXPECT_EQ(next_stage(S::kPhaseRecheck, O::kFail), S::kSnr);
  EXPECT_EQ(next_stage(S::kPhase, O::kFail), S::kSnr);
  EXPECT_EQ(next_stage(S::kDone, O::kFail), S::kDone);
  EXPECT_EQ(next_stage(S::kAborted, O::kPass), S::kAborted);
}

CalibrationConfig nominal(bool heralded) {
  CalibrationConfig c;
  c.heralded = heralded;
  c.physics = heralded ? heralded_parameters() : delayed_choice_parameters();
  c.thresholds = default_thresholds(c.physics, heralded);
  c.seed = 42;
  return c;
}

// FID is only entered once SNR, PHASE and XsweepX have passed in the same cycle.
void expect_gated_fid(const CalibrationReport& r) {
  int cycle = 0;
  std::set<CalibrationStage> passed;
  for (const StageRecord& s : r.stages) {
    if (s.cycle != cycle) {
      cycle = s.cycle;
      passed.clear();
    }
    if (s.stage == CalibrationStage::kFid) {
      EXPECT_TRUE(passed.count(CalibrationStage::kSnr) && passed.count(CalibrationStage::kPhase) &&
                  passed.count(CalibrationStage::kXsweepX))
          << "cycle " << s.cycle;
    }
    if (s.outcome == StageOutcome::kPass) passed.insert(s.stage);
  }
}

TEST(CalibrationCycle, NominalPathCompletes) {
  for (bool he : {true, false}) {
    const CalibrationConfig c = nominal(he);
    const CalibrationReport r = run_calibration_cycle(c);
    EXPECT_EQ(r.final_stage, CalibrationStage::kDone);
    EXPECT_EQ(r.cycles, 1);
    ASSERT_EQ(r.blocks.size(), 3u);
    for (const FidBlock& b : r.blocks) {
      EXPECT_FALSE(b.breakout);
      EXPECT_EQ(b.cr_passes, he ? 10000u : 30000u);
      EXPECT_DOUBLE_EQ(b.phase_setpoint_deg, r.blocks.front().phase_setpoint_deg);
      EXPECT_LT(angle_between(b.phase_setpoint_deg, r.phase.setpoint_deg), 5.0);
      EXPECT_DOUBLE_EQ(b.entangled_phase_deg, r.xsweep.entangled_phase_deg);
      EXPECT_DOUBLE_EQ(b.snr, r.snr.snr);
      EXPECT_GT(b.fidelity, 0.5);
    }
    std::vector<CalibrationStage> order;
    for (const StageRecord& s : r.stages) order.push_back(s.stage);
    using S = CalibrationStage;
    EXPECT_EQ(order, (std::vector<S>{S::kSnr, S::kPhase, S::kXsweepX, S::kFid, S::kFid, S::kFid, S::kPhaseRecheck}));
    expect_gated_fid(r);
  }
}

TEST(CalibrationCycle, CrDegradationForcesRecalibration) {
  CalibrationConfig c = nominal(true);
  c.degradation = {true, 150000, 0.5};
  const CalibrationReport r = run_calibration_cycle(c);
  bool broke = false;
  for (std::size_t i = 0; i + 1 < r.stages.size(); ++i) {
    if (r.stages[i].outcome == StageOutcome::kBreakout) {
      broke = true;
      EXPECT_EQ(r.stages[i + 1].stage, CalibrationStage::kSnr);
      EXPECT_EQ(r.stages[i + 1].cycle, r.stages[i].cycle + 1);
    }
  }
  EXPECT_TRUE(broke);
  EXPECT_GE(r.cycles, 2);
  EXPECT_EQ(r.final_stage, CalibrationStage::kDone);
  expect_gated_fid(r);
}

TEST(CalibrationCycle, UnreachableSnrAborts) {
  CalibrationConfig c = nominal(true);
  c.thresholds.min_cps_tel = 1.0;
  c.max_cycles = 4;
  const CalibrationReport r = run_calibration_cycle(c);
  EXPECT_EQ(r.final_stage, CalibrationStage::kAborted);
  EXPECT_EQ(r.cycles, 4);
  EXPECT_EQ(r.stages.size(), 4u);
  for (const StageRecord& s : r.stages) {
    EXPECT_EQ(s.stage, CalibrationStage::kSnr);
    EXPECT_EQ(s.outcome, StageOutcome::kFail);
  }
  EXPECT_TRUE(r.blocks.empty());
}

TEST(CalibrationCycle, MarginalGatesNeverSkipToFid) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CalibrationConfig c = nominal(true);
    c.seed = seed;
    c.thresholds.min_contrast = 0.725;  // right at the expected contrast
    c.max_cycles = 3;
    c.fid_blocks = 1;
    const CalibrationReport r = run_calibration_cycle(c);
    expect_gated_fid(r);
  }
}

TEST(CalibrationCycle, ReportJson) {
  const CalibrationReport r = run_calibration_cycle(nominal(true));
  const auto j = nlohmann::json::parse(calibration_report_to_json(r));
  EXPECT_EQ(j.at("final_stage"), "DONE");
  EXPECT_TRUE(j.contains("stages"));
  EXPECT_TRUE(j.contains("fid_blocks"));
  EXPECT_EQ(calibration_report_to_json(r), calibration_report_to_json(run_calibration_cycle(nominal(true))));
}

TEST(CalibrationCycle, ThresholdValidation) {
  CalibrationConfig c = nominal(true);
  c.thresholds.min_contrast = 0.0;
  EXPECT_THROW(run_calibration_cycle(c), ConfigError);
  const CalibrationThresholds t = default_thresholds(heralded_parameters(), true);
  EXPECT_NEAR(t.min_cps_tel, 0.8 * 7.1e-6, 1e-12);
  EXPECT_EQ(default_thresholds(delayed_choice_parameters(), false).fid_block_cr_checks, 30000u);
}

}  // namespace
}  // namespace qlink
