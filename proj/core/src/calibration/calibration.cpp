#include "qlink/calibration/calibration.h"

#include "qlink/model/single_click.h"
#include "qlink/quantum/readout.h"
#include "qlink/util/cosine_fit.h"
#include "qlink/util/errors.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qlink {

void CalibrationThresholds::validate() const {
  if (!(min_cps_tel > 0.0) || !(min_contrast > 0.0) || !(max_xsweep_err_deg > 0.0) || fid_block_cr_checks == 0 ||
      cr_rate_reference < 0.0) {
    throw ConfigError("calibration thresholds must be positive");
  }
}

CalibrationThresholds default_thresholds(const LinkParameters& physics, bool heralded) {
  CalibrationThresholds t;
  const double scale = window_signal_fraction(physics.window_ns, physics.decay_time_ns) /
                       window_signal_fraction(physics.detection_reference_window_ns, physics.decay_time_ns);
  t.min_cps_tel = 0.8 * scale * std::min(physics.detection_probability[0], physics.detection_probability[1]);
  const double s = deg_to_rad(physics.phase_noise_std_deg);
  t.min_contrast = 0.8 * std::exp(-0.5 * s * s);
  t.fid_block_cr_checks = heralded ? 10000 : 30000;
  return t;
}

SnrMeasurement measure_snr(const LinkParameters& physics, std::uint64_t shots, Rng& rng) {
  physics.validate();
  if (shots == 0) throw ConfigError("measure_snr: shots must be > 0");
  LinkParameters bright = physics;
  bright.alpha = {1.0, 1.0};
  const DetectionProbabilities d = detection_probabilities(bright);
  const double quiet = (1.0 - d.noise_per_detector[0]) * (1.0 - d.noise_per_detector[1]);
  const double q_noise = 1.0 - quiet;

  SnrMeasurement m;
  m.shots = shots;
  const double n = static_cast<double>(shots);
  for (int j = 0; j < 2; ++j) {
    // Each node's window sits 100 ns from the other's, so only its own photons land in it.
    const double q_signal = 1.0 - (1.0 - d.signal_per_node[j]) * quiet;
    m.signal_counts[j] = rng.binomial(shots, q_signal);
    m.noise_counts[j] = rng.binomial(shots, q_noise);
    m.cps_signal[j] = static_cast<double>(m.signal_counts[j]) / n;
    m.cps_noise[j] = static_cast<double>(m.noise_counts[j]) / n;
  }
  double sig = 0.0;
  double var_sig = 0.0;
  for (int j = 0; j < 2; ++j) {
    sig += physics.alpha[j] * (m.cps_signal[j] - m.cps_noise[j]);
    var_sig += physics.alpha[j] * physics.alpha[j] *
               (m.cps_signal[j] * (1.0 - m.cps_signal[j]) + m.cps_noise[j] * (1.0 - m.cps_noise[j])) / n;
  }
  const double noise = 0.5 * (m.cps_noise[0] + m.cps_noise[1]);
  if (noise <= 0.0) {
    m.snr = std::numeric_limits<double>::infinity();
    return m;
  }
  // Model SNR counts both detectors' background once per window.
  m.snr = sig / noise;
  const double var_noise = noise / (2.0 * n);
  m.snr_err = std::abs(m.snr) * std::sqrt(var_sig / (sig * sig) + var_noise / (noise * noise));
  return m;
}

namespace {

void require_full_span(const std::vector<double>& angles, std::size_t min_points, const char* who) {
  if (angles.size() < min_points) {
    throw ConfigError(std::string(who) + ": need at least " + std::to_string(min_points) + " angles");
  }
  std::vector<double> w;
  for (double a : angles) w.push_back(wrap_degrees(a));
  std::sort(w.begin(), w.end());
  double gap = w.front() + 360.0 - w.back();
  for (std::size_t i = 1; i < w.size(); ++i) gap = std::max(gap, w[i] - w[i - 1]);
  if (gap > 90.0) throw ConfigError(std::string(who) + ": angles must span the full circle");
}

std::vector<double> even_angles(double step) {
  std::vector<double> a;
  for (double x = 0.0; x < 360.0 - 1e-9; x += step) a.push_back(x);
  return a;
}

}  // namespace

PhaseCalibration measure_phase_fringe(const std::vector<double>& setpoints_deg, const PhaseFringeOptions& options,
                                      Rng& rng) {
  require_full_span(setpoints_deg, 8, "measure_phase_fringe");
  if (!(options.flux_ratio > 0.0)) throw ConfigError("measure_phase_fringe: flux ratio must be > 0");
  const double r = options.flux_ratio;
  const double imbalance = 2.0 * std::sqrt(r) / (1.0 + r);
  const double s = deg_to_rad(options.phase_noise_std_deg);
  const double visibility = imbalance * std::exp(-0.5 * s * s);

  std::vector<double> y;
  std::vector<double> sigma;
  for (double x : setpoints_deg) {
    const double expected = visibility * std::cos(deg_to_rad(x + options.fringe_offset_deg));
    if (options.counts_per_point == 0) {
      y.push_back(expected);
      continue;
    }
    const auto n = static_cast<double>(options.counts_per_point);
    const auto n1 = static_cast<double>(rng.binomial(options.counts_per_point, 0.5 * (1.0 + expected)));
    const double diff = (2.0 * n1 - n) / n;
    y.push_back(diff);
    sigma.push_back(std::sqrt(std::max(1.0 - diff * diff, 1.0 / n) / n));
  }
  const CosineFit fit = fit_cosine(setpoints_deg, y, sigma);
  PhaseCalibration c;
  c.contrast = fit.amplitude / imbalance;
  c.contrast_err = fit.amplitude_err / imbalance;
  c.fringe_phase_deg = fit.phase_deg;
  c.setpoint_deg = fit.phase_deg;
  return c;
}

XsweepResult measure_xsweepx(const LinkParameters& physics, double optical_setpoint_deg, const XsweepOptions& options,
                             Rng& rng) {
  XsweepResult res;
  res.angles_deg = options.angles_deg.empty() ? even_angles(30.0) : options.angles_deg;
  require_full_span(res.angles_deg, 4, "measure_xsweepx");
  const double theta = optical_setpoint_deg + options.entangled_phase_offset_deg;
  const HeraldedOutcome out = heralded_state(physics, theta);
  if (out.success_probability <= 0.0) throw ConfigError("measure_xsweepx: no heralded events");
  const ReadoutModel readout = physics.readout_model();
  const double w1 = out.probability[0] / out.success_probability;
  const std::array<double, 2> sign{static_cast<double>(heralded_sign(1)), static_cast<double>(heralded_sign(2))};

  std::vector<double> sigma;
  for (double beta : res.angles_deg) {
    std::array<OutcomeDistribution, 2> dist;
    for (int d = 0; d < 2; ++d) {
      dist[d] = apply_readout(out.state[d], readout, MeasurementBasis::equatorial(0.0),
                              MeasurementBasis::equatorial(beta));
    }
    if (options.heralds_per_angle == 0) {
      double y = 0.0;
      for (int d = 0; d < 2; ++d) {
        const double w = d == 0 ? w1 : 1.0 - w1;
        y += w * sign[d] * correlator_from_distribution(dist[d], 1.0).value;
      }
      res.correlation.push_back(y);
      res.correlation_err.push_back(0.0);
      continue;
    }
    const std::uint64_t n = options.heralds_per_angle;
    const std::uint64_t n1 = rng.binomial(n, w1);
    double sum = 0.0;
    for (int d = 0; d < 2; ++d) {
      const std::uint64_t nd = d == 0 ? n1 : n - n1;
      for (std::uint64_t i = 0; i < nd; ++i) {
        const std::size_t o = rng.categorical(dist[d].data(), 4);
        const double parity = (o == 0 || o == 3) ? 1.0 : -1.0;
        sum += sign[d] * parity;
      }
    }
    const double y = sum / static_cast<double>(n);
    res.correlation.push_back(y);
    const double e = std::sqrt(std::max(1.0 - y * y, 1.0 / static_cast<double>(n)) / static_cast<double>(n));
    res.correlation_err.push_back(e);
    sigma.push_back(e);
  }
  // E(beta) = A cos(beta + theta); the fit phase is -theta.
  const CosineFit fit = fit_cosine(res.angles_deg, res.correlation, sigma);
  res.entangled_phase_deg = wrap_degrees(-fit.phase_deg);
  res.entangled_phase_err_deg = fit.phase_err_deg;
  res.amplitude = fit.amplitude;
  res.amplitude_err = fit.amplitude_err;
  return res;
}

std::string to_string(CalibrationStage s) {
  switch (s) {
    case CalibrationStage::kSnr: return "SNR";
    case CalibrationStage::kPhase: return "PHASE";
    case CalibrationStage::kXsweepX: return "XsweepX";
    case CalibrationStage::kFid: return "FID";
    case CalibrationStage::kPhaseRecheck: return "PHASE_RECHECK";
    case CalibrationStage::kDone: return "DONE";
    case CalibrationStage::kAborted: return "ABORTED";
  }
  return "?";
}

std::string to_string(StageOutcome o) {
  switch (o) {
    case StageOutcome::kPass: return "pass";
    case StageOutcome::kFail: return "fail";
    case StageOutcome::kBlockComplete: return "block_complete";
    case StageOutcome::kBreakout: return "breakout";
    case StageOutcome::kFinished: return "finished";
  }
  return "?";
}

CalibrationStage next_stage(CalibrationStage s, StageOutcome o) {
  using S = CalibrationStage;
  using O = StageOutcome;
  switch (s) {
    case S::kSnr:
      return o == O::kPass ? S::kPhase : S::kSnr;
    case S::kPhase:
      return o == O::kPass ? S::kXsweepX : S::kSnr;
    case S::kXsweepX:
      return o == O::kPass ? S::kFid : S::kSnr;
    case S::kFid:
      switch (o) {
        case O::kBlockComplete:
        case O::kPass: return S::kFid;
        case O::kFinished: return S::kPhaseRecheck;
        case O::kBreakout:
        case O::kFail: return S::kSnr;
      }
      return S::kSnr;
    case S::kPhaseRecheck:
      return o == O::kPass ? S::kDone : S::kSnr;
    case S::kDone:
      return S::kDone;
    case S::kAborted:
      return S::kAborted;
  }
  return S::kAborted;
}

namespace {

// Attempts used by one CR pass in heralded mode given a success at attempt k.
std::uint64_t truncated_geometric(double p, std::uint64_t max, Rng& rng) {
  const double u = rng.uniform();
  const double tail = 1.0 - std::pow(1.0 - p, static_cast<double>(max));
  const double k = std::floor(std::log1p(-u * tail) / std::log1p(-p));
  return std::min<std::uint64_t>(max - 1, static_cast<std::uint64_t>(std::max(0.0, k)));
}

}  // namespace

CalibrationReport run_calibration_cycle(const CalibrationConfig& config) {
  config.thresholds.validate();
  config.physics.validate();
  if (!(config.cr_pass_probability > 0.0 && config.cr_pass_probability <= 1.0)) {
    throw ConfigError("cr_pass_probability must be in (0, 1]");
  }
  if (config.fid_blocks < 1 || config.max_cycles < 1 || config.snr_cr_checks == 0) {
    throw ConfigError("calibration: fid_blocks, max_cycles and snr_cr_checks must be >= 1");
  }
  Rng root(config.seed);
  Rng rng_snr = root.split("snr");
  Rng rng_phase = root.split("phase");
  Rng rng_xsweep = root.split("xsweep");
  Rng rng_fid = root.split("fid");

  const std::vector<double> setpoints =
      config.fringe_setpoints_deg.empty() ? even_angles(20.0) : config.fringe_setpoints_deg;
  PhaseFringeOptions fringe = config.fringe;
  fringe.phase_noise_std_deg = config.physics.phase_noise_std_deg;

  const HeraldedOutcome nominal = heralded_state(config.physics, 0.0);
  const double p_attempt =
      config.attempt_success_probability >= 0.0 ? config.attempt_success_probability : nominal.success_probability;
  const std::uint64_t attempts_per_pass = config.heralded ? 228 : 540;

  CalibrationReport rep;
  rep.cycles = 1;
  CalibrationStage stage = CalibrationStage::kSnr;
  std::uint64_t fid_cr_total = 0;
  int blocks_this_cycle = 0;
  double fidelity_in_force = 0.0;

  const auto cr_probability = [&](std::uint64_t checks_done) {
    if (config.degradation.enabled && checks_done >= config.degradation.after_cr_checks) {
      return config.cr_pass_probability * config.degradation.factor;
    }
    return config.cr_pass_probability;
  };

  while (stage != CalibrationStage::kDone && stage != CalibrationStage::kAborted) {
    StageRecord rec;
    rec.cycle = rep.cycles;
    rec.stage = stage;
    StageOutcome outcome = StageOutcome::kFail;
    switch (stage) {
      case CalibrationStage::kSnr: {
        rep.snr = measure_snr(config.physics, config.snr_shots, rng_snr);
        const double p = cr_probability(fid_cr_total);
        const auto passes = rng_snr.binomial(config.snr_cr_checks, p);
        rep.cr_rate_reference = config.thresholds.cr_rate_reference > 0.0
                                    ? config.thresholds.cr_rate_reference
                                    : static_cast<double>(passes) / static_cast<double>(config.snr_cr_checks);
        rec.gate = "cps_tel";
        rec.value = std::min(rep.snr.cps_signal[0], rep.snr.cps_signal[1]);
        rec.threshold = config.thresholds.min_cps_tel;
        outcome = rec.value >= rec.threshold ? StageOutcome::kPass : StageOutcome::kFail;
        break;
      }
      case CalibrationStage::kPhase:
      case CalibrationStage::kPhaseRecheck: {
        const PhaseCalibration pc = measure_phase_fringe(setpoints, fringe, rng_phase);
        rep.phase.contrast = pc.contrast;
        rep.phase.contrast_err = pc.contrast_err;
        rep.phase.fringe_phase_deg = pc.fringe_phase_deg;
        rep.phase.setpoint_deg = pc.setpoint_deg;
        rec.gate = "contrast";
        rec.value = pc.contrast;
        rec.threshold = config.thresholds.min_contrast;
        outcome = rec.value >= rec.threshold ? StageOutcome::kPass : StageOutcome::kFail;
        break;
      }
      case CalibrationStage::kXsweepX: {
        rep.xsweep = measure_xsweepx(config.physics, config.optical_setpoint_deg, config.xsweep, rng_xsweep);
        rep.phase.entangled_phase_deg = rep.xsweep.entangled_phase_deg;
        rep.phase.entangled_phase_err_deg = rep.xsweep.entangled_phase_err_deg;
        rec.gate = "xsweep_phase_err_deg";
        rec.value = rep.xsweep.entangled_phase_err_deg;
        rec.threshold = config.thresholds.max_xsweep_err_deg;
        outcome = rec.value <= rec.threshold ? StageOutcome::kPass : StageOutcome::kFail;
        if (outcome == StageOutcome::kPass) {
          const double theta = config.optical_setpoint_deg + config.xsweep.entangled_phase_offset_deg;
          fidelity_in_force = heralded_state(config.physics, theta - rep.xsweep.entangled_phase_deg).mean_fidelity();
        }
        break;
      }
      case CalibrationStage::kFid: {
        FidBlock b;
        b.cycle = rep.cycles;
        b.phase_setpoint_deg = rep.phase.setpoint_deg;
        b.entangled_phase_deg = rep.phase.entangled_phase_deg;
        b.snr = rep.snr.snr;
        b.fidelity = fidelity_in_force;
        const std::uint64_t target = config.thresholds.fid_block_cr_checks;
        const double ref = rep.cr_rate_reference;
        // A fixed reference from the thresholds carries no sampling error.
        const double ref_checks = config.thresholds.cr_rate_reference > 0.0
                                      ? std::numeric_limits<double>::infinity()
                                      : static_cast<double>(config.snr_cr_checks);
        constexpr std::uint64_t kChunk = 1000;
        double floor_rate = 0.0;
        while (b.cr_passes < target && !b.breakout) {
          const double p = cr_probability(fid_cr_total);
          const std::uint64_t need = target - b.cr_passes;
          if (need < 200) {
            // Close to the block size: one check at a time so the block ends exactly on target.
            ++b.cr_checks;
            ++fid_cr_total;
            if (rng_fid.bernoulli(p)) ++b.cr_passes;
            if (b.cr_checks % kChunk != 0) continue;
          } else {
            // Expected passes at most half of what is still needed.
            const auto n = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(0.5 * static_cast<double>(need) / p),
                                                     1, kChunk);
            b.cr_passes += std::min(need, rng_fid.binomial(n, p));
            b.cr_checks += n;
            fid_cr_total += n;
          }
          // Rolling rate over the current block against the SNR-time reference.
          const double rate = static_cast<double>(b.cr_passes) / static_cast<double>(b.cr_checks);
          const double var = ref * (1.0 - ref) * (1.0 / static_cast<double>(b.cr_checks) + 1.0 / ref_checks);
          floor_rate = ref - 3.0 * std::sqrt(var);
          if (rate < floor_rate) b.breakout = true;
        }
        b.cr_rate = static_cast<double>(b.cr_passes) / static_cast<double>(std::max<std::uint64_t>(1, b.cr_checks));
        if (config.heralded) {
          const double p_block = 1.0 - std::pow(1.0 - p_attempt, static_cast<double>(attempts_per_pass));
          b.successes = rng_fid.binomial(b.cr_passes, p_block);
          b.attempts = (b.cr_passes - b.successes) * attempts_per_pass;
          for (std::uint64_t i = 0; i < b.successes; ++i) {
            b.attempts += truncated_geometric(p_attempt, attempts_per_pass, rng_fid) + 1;
          }
        } else {
          b.attempts = b.cr_passes * attempts_per_pass;
          b.successes = rng_fid.binomial(b.attempts, p_attempt);
        }
        rec.gate = "cr_rate";
        rec.value = b.cr_rate;
        rec.threshold = floor_rate;
        rep.blocks.push_back(b);
        if (b.breakout) {
          outcome = StageOutcome::kBreakout;
        } else {
          ++blocks_this_cycle;
          outcome = blocks_this_cycle >= config.fid_blocks ? StageOutcome::kFinished : StageOutcome::kBlockComplete;
        }
        break;
      }
      case CalibrationStage::kDone:
      case CalibrationStage::kAborted:
        break;
    }
    rec.outcome = outcome;
    rep.stages.push_back(rec);
    const CalibrationStage next = next_stage(stage, outcome);
    if (next == CalibrationStage::kSnr) {
      blocks_this_cycle = 0;
      ++rep.cycles;
      if (rep.cycles > config.max_cycles) {
        rep.cycles = config.max_cycles;
        stage = CalibrationStage::kAborted;
        continue;
      }
    }
    stage = next;
  }
  rep.final_stage = stage;
  return rep;
}

std::string calibration_report_to_json(const CalibrationReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["final_stage"] = to_string(r.final_stage);
  j["cycles"] = r.cycles;
  ordered_json stages = ordered_json::array();
  for (const StageRecord& s : r.stages) {
    ordered_json o;
    o["cycle"] = s.cycle;
    o["stage"] = to_string(s.stage);
    o["outcome"] = to_string(s.outcome);
    o["gate"] = s.gate;
    o["value"] = s.value;
    o["threshold"] = s.threshold;
    stages.push_back(o);
  }
  j["stages"] = stages;
  ordered_json snr;
  snr["shots"] = r.snr.shots;
  snr["signal_counts"] = r.snr.signal_counts;
  snr["noise_counts"] = r.snr.noise_counts;
  snr["cps_signal"] = r.snr.cps_signal;
  snr["cps_noise"] = r.snr.cps_noise;
  snr["snr"] = std::isfinite(r.snr.snr) ? ordered_json(r.snr.snr) : ordered_json(nullptr);
  snr["snr_err"] = r.snr.snr_err;
  snr["cr_rate_reference"] = r.cr_rate_reference;
  j["snr"] = snr;
  ordered_json phase;
  phase["contrast"] = r.phase.contrast;
  phase["contrast_err"] = r.phase.contrast_err;
  phase["setpoint_deg"] = r.phase.setpoint_deg;
  phase["entangled_phase_deg"] = r.phase.entangled_phase_deg;
  phase["entangled_phase_err_deg"] = r.phase.entangled_phase_err_deg;
  j["phase"] = phase;
  ordered_json xs;
  xs["angles_deg"] = r.xsweep.angles_deg;
  xs["correlation"] = r.xsweep.correlation;
  xs["correlation_err"] = r.xsweep.correlation_err;
  xs["amplitude"] = r.xsweep.amplitude;
  j["xsweepx"] = xs;
  ordered_json blocks = ordered_json::array();
  for (const FidBlock& b : r.blocks) {
    ordered_json o;
    o["cycle"] = b.cycle;
    o["cr_checks"] = b.cr_checks;
    o["cr_passes"] = b.cr_passes;
    o["cr_rate"] = b.cr_rate;
    o["breakout"] = b.breakout;
    o["attempts"] = b.attempts;
    o["successes"] = b.successes;
    o["fidelity"] = b.fidelity;
    o["phase_setpoint_deg"] = b.phase_setpoint_deg;
    o["entangled_phase_deg"] = b.entangled_phase_deg;
    o["snr"] = std::isfinite(b.snr) ? ordered_json(b.snr) : ordered_json(nullptr);
    blocks.push_back(o);
  }
  j["fid_blocks"] = blocks;
  return j.dump(2);
}

}  // namespace qlink
