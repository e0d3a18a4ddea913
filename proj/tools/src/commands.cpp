#include "commands.h"

#include "qlink/drift/phase_chain.h"
#include "qlink/model/single_click.h"
#include "qlink/sim/event_log.h"
#include "qlink/util/errors.h"
#include "qlink/util/rng.h"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace qlink::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string out_path(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.out);
  return (fs::path(c.out) / name).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path + ": cannot write");
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string histogram_rows(const std::string& series, const Histogram& h) {
  std::string s;
  for (std::size_t i = 0; i < h.bin_center.size(); ++i) {
    if (h.probability[i] == 0.0) continue;
    s += series + "," + fmt(h.bin_center[i]) + "," + fmt(h.probability[i]) + "\n";
  }
  return s;
}

ordered_json stats_json(const ResidualStats& r) {
  return {{"mean", r.mean}, {"std", r.std}, {"bound", r.bound}, {"fraction_within", r.fraction_within},
          {"samples", r.samples}};
}

struct SweepRow {
  double window_ns = 0.0;
  double fidelity = 0.0;
  double fidelity_err = 0.0;
  double rate_hz = 0.0;
  double snr = 0.0;
};

SweepRow sweep_point(const RunConfig& config, double window_ns) {
  RunConfig c = config;
  c.physics.window_ns = window_ns;
  const LinkSimConfig sim = c.link_sim_config();
  const LinkParameters physics = c.mode == LinkMode::kHeralded ? heralded_physics(sim) : c.physics;
  const HeraldedOutcome out = heralded_state(physics, sim.state_phase_deg - sim.phase_correction_deg);
  const double p = attempt_success_probability(c.mode, sim);
  SweepRow row;
  row.window_ns = window_ns;
  row.fidelity = out.mean_fidelity();
  row.rate_hz = p * expected_attempt_rate(c.mode, sim, p);
  row.snr = snr(physics);
  // Binomial correlator errors for the events expected in the configured run time.
  const double events = row.rate_hz * c.duration_s;
  if (events > 0.0 && out.success_probability > 0.0) {
    double var = 0.0;
    for (int d = 0; d < 2; ++d) {
      const double per_basis = events * out.probability[d] / out.success_probability / 3.0;
      const CorrelatorTriple t = correlators(out.state[d]);
      double v = 0.0;
      for (double x : {t.xx, t.yy, t.zz}) v += (1.0 - x * x) / per_basis;
      var += v / 16.0;
    }
    row.fidelity_err = 0.5 * std::sqrt(var);
  }
  return row;
}

}  // namespace

std::vector<double> parse_window_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("--windows: cannot parse '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos || !(v > 0.0)) {
      throw ConfigError("--windows: '" + item + "' is not a positive number");
    }
    out.push_back(v);
  }
  return out;
}

CommandOutput cmd_simulate(const RunConfig& config) {
  CommandOutput o;
  const std::string events = out_path(config, "events.ndjson");
  RunResult r;
  {
    std::ofstream f(events, std::ios::binary);
    if (!f) throw ConfigError(events + ": cannot write");
    NdjsonWriter writer(f);
    r = run_link(config.mode, config.link_sim_config(), {&writer});
  }
  const std::string summary = out_path(config, "summary.json");
  write_file(summary, summary_to_json(r.summary) + "\n");
  o.files = {events, summary};
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s: %llu successes, rate %.4g Hz, fidelity %.4f", r.summary.mode.c_str(),
                static_cast<unsigned long long>(r.summary.successes), r.summary.rate_hz, r.summary.fidelity);
  o.message = buf;
  return o;
}

CommandOutput cmd_verify(const std::string& events_path, const std::string& summary_path) {
  std::ifstream in(events_path, std::ios::binary);
  if (!in) throw ConfigError(events_path + ": cannot open");
  const std::vector<Event> events = read_ndjson(in);
  const std::string stored = read_file(summary_path);
  CommandOutput o;
  if (events.empty()) {
    // A zero-length run logs nothing; its summary must carry no counts.
    const ordered_json j = ordered_json::parse(stored);
    if (j.at("attempts").get<std::uint64_t>() != 0 || j.at("successes").get<std::uint64_t>() != 0) {
      throw InvariantError("empty event log but summary reports activity");
    }
    o.message = "verified: empty log, zero counts";
    return o;
  }
  const std::string recomputed = summary_to_json(summarize_events(events)) + "\n";
  if (recomputed != stored) throw InvariantError("summary does not match the event log aggregate");
  o.message = "verified: summary matches " + std::to_string(events.size()) + " events";
  return o;
}

std::string sweep_window_csv(const RunConfig& config, int threads) {
  const std::vector<double>& w = config.sweep_windows_ns;
  std::vector<SweepRow> rows(w.size());
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(w.size())));
  if (n <= 1) {
    for (std::size_t i = 0; i < w.size(); ++i) rows[i] = sweep_point(config, w[i]);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n);
    for (int t = 0; t < n; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < w.size(); i += n) rows[i] = sweep_point(config, w[i]);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::string csv = "window_ns,fidelity,fidelity_err,rate_hz,snr\n";
  for (const SweepRow& r : rows) {
    csv += fmt(r.window_ns) + "," + fmt(r.fidelity) + "," + fmt(r.fidelity_err) + "," + fmt(r.rate_hz) + "," +
           fmt(r.snr) + "\n";
  }
  return csv;
}

CommandOutput cmd_sweep_window(const RunConfig& config, int threads) {
  const std::string path = out_path(config, "sweep_window.csv");
  write_file(path, sweep_window_csv(config, threads));
  return {{path}, std::to_string(config.sweep_windows_ns.size()) + " window(s)"};
}

std::string error_budget_csv(const RunConfig& config) {
  LinkParameters p = config.physics;
  if (config.scenario != "measured") {
    for (const ScenarioResult& s : improvement_scenarios()) {
      if (s.name == config.scenario) p = s.parameters;
    }
  }
  const ErrorBudget b = error_budget(p);
  std::string csv = "parameter,value,infidelity_contribution\n";
  for (const BudgetRow& r : b.rows) {
    csv += r.parameter + ",\"" + r.value + "\"," + fmt(100.0 * r.infidelity) + "\n";
  }
  csv += "total,," + fmt(100.0 * b.total_infidelity) + "\n";
  csv += "simulated_fidelity,," + fmt(b.fidelity) + "\n";
  return csv;
}

CommandOutput cmd_error_budget(const RunConfig& config) {
  const std::string path = out_path(config, "error_budget_" + config.scenario + ".csv");
  write_file(path, error_budget_csv(config));
  return {{path}, "scenario " + config.scenario};
}

CommandOutput cmd_drift(const RunConfig& config, const std::string& channel) {
  const DriftKind kind = drift_kind_from_string(channel);
  const std::uint64_t seed = derive_seed(config.seed, "drift_" + channel);
  std::string hist = "series,bin_center,probability\n";
  std::string speed;
  ordered_json summary;
  summary["channel"] = channel;

  try {
    switch (kind) {
      case DriftKind::kTiming: {
        const TimingDriftConfig& t = config.drift.timing;
        DriftProcess p = timing_drift_process(seed);
        p.step_std_per_sqrt_s = t.step_ps_per_sqrt_s;
        const TimeSeries s = simulate_drift(p, t.duration_s, t.dt_s);
        std::vector<double> free(s.values.begin(), s.values.end());
        for (double& x : free) x -= s.values.front();
        const ResidualStats f = residual_stats(free, t.bound_ps, t.bin_ps);
        const ResidualStats r = run_sampled_correction(s, t.correction_interval_s, t.bound_ps, t.bin_ps);
        hist += histogram_rows("free", f.histogram) + histogram_rows("stabilized", r.histogram);
        speed = "increment_ps_per_min\n";
        for (double x : drift_increments(s, 60.0)) speed += fmt(x) + "\n";
        summary["free"] = stats_json(f);
        summary["stabilized"] = stats_json(r);
        summary["predicted_residual_std_ps"] =
            sampled_correction_residual_std(t.step_ps_per_sqrt_s, t.correction_interval_s);
        break;
      }
      case DriftKind::kFrequency: {
        const FrequencyDriftConfig& fc = config.drift.frequency;
        DriftProcess p = frequency_drift_process(seed);
        p.step_std_per_sqrt_s = fc.step_mhz_per_sqrt_s;
        const TimeSeries s = simulate_drift(p, fc.duration_s, fc.dt_s);
        std::vector<double> free(s.values.begin(), s.values.end());
        for (double& x : free) x -= s.values.front();
        const ResidualStats f = residual_stats(free, fc.desaturation.fast_range_mhz, fc.bin_mhz);
        const DesaturationReport d = run_desaturation(fc.desaturation, s);
        hist += histogram_rows("free", f.histogram) + histogram_rows("stabilized", d.fast_load.histogram);
        speed = "increment_mhz_per_min\n";
        for (double x : drift_increments(s, 60.0)) speed += fmt(x) + "\n";
        summary["free"] = stats_json(f);
        summary["stabilized"] = stats_json(d.fast_load);
        summary["drift_span_mhz"] = d.drift_span_mhz;
        summary["saturation_events"] = d.saturation_events;
        summary["corrections_issued"] = d.corrections_issued;
        summary["max_fast_load_mhz"] = d.max_fast_load_mhz;
        summary["slow_saturated"] = d.slow_saturated;
        break;
      }
      case DriftKind::kPhase: {
        const PhaseDriftConfig& pc = config.drift.phase;
        PhaseChainConfig chain = default_phase_chain(config.mode == LinkMode::kHeralded);
        for (PhaseNoiseSegment& seg : chain.segments) {
          seg.random_walk_psd *= pc.noise_scale;
          seg.white_psd *= pc.noise_scale;
        }
        chain.hold_inflation_deg *= std::sqrt(pc.noise_scale);
        PhaseChainConfig open = chain;
        for (std::size_t i = 0; i < chain.loops.size(); ++i) {
          chain.loops[i].enabled = pc.loops_enabled[i];
          open.loops[i].enabled = false;
        }
        Rng rng(seed);
        Rng rng_free = rng.split("free");
        Rng rng_locked = rng.split("locked");
        const PhaseChainResult f = run_phase_lock_chain(open, rng_free, pc.samples);
        const PhaseChainResult r = run_phase_lock_chain(chain, rng_locked, pc.samples);
        hist += histogram_rows("free", f.stats.histogram) + histogram_rows("stabilized", r.stats.histogram);
        summary["free"] = stats_json(f.stats);
        summary["stabilized"] = stats_json(r.stats);
        summary["loop_residual_deg"] = r.loop_residual_deg;
        summary["residual_std_deg"] = r.total_std_deg;
        break;
      }
      case DriftKind::kPolarization: {
        const PolarizationChannelConfig& pc = config.drift.polarization;
        Rng rng(seed);
        Rng rng_drift = rng.split("drift");
        Rng rng_free = rng.split("free");
        Rng rng_locked = rng.split("locked");
        const auto drift = simulate_polarization_drift(pc.drift, rng_drift);
        PolarizationFeedbackConfig off = pc.feedback;
        off.feedback_rate_hz = 0.0;
        const PolarizationResult f = run_polarization_feedback(drift, pc.drift.dt_s, off, rng_free);
        const PolarizationResult r = run_polarization_feedback(drift, pc.drift.dt_s, pc.feedback, rng_locked);
        hist += histogram_rows("free", f.overlap.histogram) + histogram_rows("stabilized", r.overlap.histogram);
        summary["free"] = stats_json(f.overlap);
        summary["stabilized"] = stats_json(r.overlap);
        summary["target_overlap"] = pc.feedback.target_overlap;
        summary["fraction_above_target"] = r.overlap.fraction_within;
        break;
      }
    }
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("drift: ") + ex.what());
  }

  CommandOutput o;
  const std::string hp = out_path(config, "drift_" + channel + ".csv");
  write_file(hp, hist);
  o.files.push_back(hp);
  if (!speed.empty()) {
    const std::string sp = out_path(config, "drift_" + channel + "_speed.csv");
    write_file(sp, speed);
    o.files.push_back(sp);
  }
  const std::string js = out_path(config, "drift_" + channel + "_summary.json");
  write_file(js, summary.dump(2) + "\n");
  o.files.push_back(js);
  o.message = "channel " + channel;
  return o;
}

CommandOutput cmd_calibrate(const RunConfig& config) {
  const CalibrationReport r = run_calibration_cycle(config.calibration_config());
  const std::string path = out_path(config, "calibration_report.json");
  write_file(path, calibration_report_to_json(r) + "\n");
  return {{path}, "final stage " + to_string(r.final_stage) + " after " + std::to_string(r.cycles) + " cycle(s)"};
}

}  // namespace qlink::cli
