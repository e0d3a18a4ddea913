// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include "qlink/config/run_config.h"
#include "qlink/drift/drift.h"
#include "qlink/drift/phase_chain.h"
#include "qlink/drift/polarization.h"
#include "qlink/model/single_click.h"
#include "qlink/sim/link_simulator.h"

#include "test_support.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

namespace {

using namespace qlink;

int failures = 0;

void report(const std::string& id, bool pass, const std::string& what) {
  std::printf("%s [%s] %s\n", pass ? "PASS" : "FAIL", id.c_str(), what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

void within(const std::string& id, const std::string& what, double value, double target, double tol) {
  report(id, std::abs(value - target) <= tol, what + fmt(": %.4g (target %.4g +- %.3g)", value, target, tol));
}

void within_rel(const std::string& id, const std::string& what, double value, double target, double rel) {
  report(id, std::abs(value / target - 1.0) <= rel,
         what + fmt(": %.4g (target %.4g +- %.0f%%)", value, target, 100.0 * rel));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig canonical(const char* name) { return load_run_config(std::string(QLINK_CONFIG_DIR) + "/" + name); }

void fidelity_reproduction() {
  for (const bool heralded : {true, false}) {
    const auto t0 = std::chrono::steady_clock::now();
    const LinkParameters p = heralded ? heralded_parameters() : delayed_choice_parameters();
    const HeraldedOutcome ex = heralded_state(p);
    Rng rng(derive_seed(1, heralded ? "mc_heralded" : "mc_delayed_choice"));
    MonteCarloOptions o;
    o.samples = 1000000;
    const MonteCarloEstimate mc = monte_carlo_heralded(p, 0.0, rng, o);
    const double elapsed = seconds_since(t0);
    if (heralded) {
      within("1.heralded", "mean fidelity, enumeration", ex.mean_fidelity(), 0.544, 0.015);
      within("1.heralded-mc", "mean fidelity, 1e6 Monte-Carlo samples", 0.5 * (mc.fidelity[0] + mc.fidelity[1]), 0.544,
             0.015);
    } else {
      within("1.dc-det1", "detector 1 fidelity, enumeration", ex.fidelity(1), 0.568, 0.015);
      within("1.dc-det2", "detector 2 fidelity, enumeration", ex.fidelity(2), 0.576, 0.015);
      within("1.dc-mc-det1", "detector 1 fidelity, 1e6 Monte-Carlo samples", mc.fidelity[0], 0.568, 0.015);
      within("1.dc-mc-det2", "detector 2 fidelity, 1e6 Monte-Carlo samples", mc.fidelity[1], 0.576, 0.015);
    }
    report(std::string("1.runtime-") + (heralded ? "heralded" : "dc"), elapsed < 60.0,
           fmt("enumeration + 1e6 samples in %.2f s (limit 60 s)", elapsed));
  }
}

void error_budget_reproduction() {
  struct Row {
    const char* name;
    double heralded;
    double dc;
  };
  const Row rows[] = {{"noise", 28.5, 32.7},          {"phase_noise", 14.3, 9.8},
                      {"dephasing", 4.5, 2.3},        {"spectral_diffusion", 4.8, 4.5},
                      {"double_excitation", 3.8, 3.7}, {"ionization", 6.2, 5.4}};
  for (const bool heralded : {true, false}) {
    const ErrorBudget b = error_budget(heralded ? heralded_parameters() : delayed_choice_parameters());
    const std::string col = heralded ? "heralded" : "dc";
    for (const Row& r : rows) {
      double value = -1.0;
      for (const BudgetRow& br : b.rows) {
        if (br.parameter == r.name) value = 100.0 * br.infidelity;
      }
      within("2." + col + "." + r.name, col + " " + r.name + " infidelity [%]", value, heralded ? r.heralded : r.dc,
             3.0);
    }
    within("2." + col + ".total", col + " total infidelity [%]", 100.0 * b.total_infidelity, heralded ? 45.6 : 43.1,
           3.0);
  }
}

void improvement_scenarios_check() {
  for (const ScenarioResult& s : improvement_scenarios()) {
    within("3." + s.name, s.name + " fidelity", s.fidelity, s.name == "future" ? 0.90 : 0.828, 0.02);
  }
}

void rates() {
  RunConfig dc = canonical("delayed_choice.json");
  dc.physics.window_ns = 20.0;
  dc.duration_s = 3600.0;
  LinkSimConfig ps = dc.link_sim_config();
  const RunResult r = run_post_selected(ps);
  within_rel("4.post-selected-rate", "post-selected rate at 20 ns [Hz]", r.summary.rate_hz, 0.48, 0.15);
  const double p_sim = static_cast<double>(r.summary.successes) / static_cast<double>(r.summary.attempts);
  within_rel("4.post-selected-p", fmt("success probability per attempt (%.3g attempts)",
                                      static_cast<double>(r.summary.attempts)),
             p_sim, 7.2e-6, 0.25);

  RunConfig he = canonical("heralded.json");
  he.duration_s = 36000.0;
  he.log_handshake = false;
  const LinkSimConfig hc = he.link_sim_config();
  const RunResult h = run_heralded(hc);
  within_rel("4.heralded-rate", fmt("heralded rate at %.0f ns [Hz]", he.physics.window_ns), h.summary.rate_hz, 0.022,
             0.15);
  within("4.heralded-fidelity", "heralded delivered fidelity to Psi-", h.summary.fidelity, 0.534, 0.03);
  report("4.period", h.summary.attempt_period_us == 20.0 * r.summary.attempt_period_us,
         fmt("heralded attempt period %.1f us vs heartbeat %.1f us", h.summary.attempt_period_us,
             r.summary.attempt_period_us));
}

void drift_and_feedback() {
  const RunConfig c = canonical("heralded.json");
  {
    const TimingDriftConfig& t = c.drift.timing;
    DriftProcess p = timing_drift_process(derive_seed(c.seed, "drift_timing"));
    p.step_std_per_sqrt_s = t.step_ps_per_sqrt_s;
    const TimeSeries s = simulate_drift(p, t.duration_s, t.dt_s);
    const ResidualStats r = run_sampled_correction(s, t.correction_interval_s, t.bound_ps, t.bin_ps);
    report("5.timing", r.fraction_within >= 0.99,
           fmt("%.2f%% of 24 h residuals within +-50 ps (>= 99%%), corrections every %.0f s", 100.0 * r.fraction_within,
               t.correction_interval_s));
  }
  {
    const FrequencyDriftConfig& fc = c.drift.frequency;
    DriftProcess p = frequency_drift_process(derive_seed(c.seed, "drift_frequency"));
    p.step_std_per_sqrt_s = fc.step_mhz_per_sqrt_s;
    const DesaturationReport d = run_desaturation(fc.desaturation, simulate_drift(p, fc.duration_s, fc.dt_s));
    report("5.frequency", d.drift_span_mhz > 50.0 && d.saturation_events == 0,
           fmt("drift span %.1f MHz (> 50), fast-actuator saturations %.0f (== 0)", d.drift_span_mhz,
               static_cast<double>(d.saturation_events)));
  }
  {
    const PolarizationChannelConfig& pc = c.drift.polarization;
    Rng rng(derive_seed(c.seed, "drift_polarization"));
    Rng rng_drift = rng.split("drift");
    Rng rng_locked = rng.split("locked");
    const auto drift = simulate_polarization_drift(pc.drift, rng_drift);
    const PolarizationResult r = run_polarization_feedback(drift, pc.drift.dt_s, pc.feedback, rng_locked);
    report("5.polarization", r.overlap.fraction_within >= 0.95,
           fmt("%.2f%% of samples with overlap >= %.2f (>= 95%%)", 100.0 * r.overlap.fraction_within,
               pc.feedback.target_overlap));
  }
  Rng rng(derive_seed(c.seed, "drift_phase"));
  within("5.phase-dc", "phase chain residual std, delayed-choice [deg]",
         run_phase_lock_chain(default_phase_chain(false), rng, 10000).total_std_deg, 35.0, 5.0);
  within("5.phase-heralded", "phase chain residual std, heralded [deg]",
         run_phase_lock_chain(default_phase_chain(true), rng, 10000).total_std_deg, 45.3, 5.0);
}

void property_suites() {
  {
    Rng rng(20240301);
    int agree = 0;
    double worst = 0.0;
    bool valid = true;
    const int sets = 20;
    for (int k = 0; k < sets; ++k) {
      const LinkParameters p = test_support::random_parameters(rng);
      const auto cmp = test_support::compare_mc_to_enumeration(p, derive_seed(7, static_cast<std::uint64_t>(k)), 200000);
      worst = std::max(worst, cmp.max_pull());
      if (cmp.max_pull() < 3.0) ++agree;
      const HeraldedOutcome o = heralded_state(p, 360.0 * rng.uniform());
      for (int d = 0; d < 2; ++d) valid = valid && o.state[d].is_valid() && o.probability[d] >= 0.0 && o.probability[d] <= 1.0;
    }
    report("6.mc-vs-enumeration", agree == sets,
           fmt("%.0f/%.0f random parameter sets within 3 sigma (worst pull %.2f)", agree, sets, worst));
    for (const LinkParameters& p : {heralded_parameters(), delayed_choice_parameters(), near_term_parameters(),
                                    future_parameters()}) {
      const HeraldedOutcome o = heralded_state(p);
      valid = valid && o.state[0].is_valid() && o.state[1].is_valid();
    }
    report("6.state-validity", valid, "heralded density matrices Hermitian, unit trace, positive");
  }
  {
    LinkSimConfig c = canonical("heralded.json").link_sim_config();
    c.duration_s = 1200.0;
    c.forced_success_probability = 0.02;
    c.log_handshake = false;
    const RunResult r = run_heralded(c);
    bool ff_ok = r.summary.target_sign[0] == -1 && r.summary.target_sign[1] == -1;
    for (const DeliveredState& d : r.delivered) {
      ff_ok = ff_ok && d.feedforward_applied == (d.detector == 1) && d.target_sign == -1 && d.state.is_valid();
    }
    const auto err = [&](int d) {
      double v = 0.0;
      for (double e : r.summary.correlator_err[d]) v += e * e;
      return 0.25 * std::sqrt(v);
    };
    const double diff = r.summary.measured_fidelity[0] - r.summary.measured_fidelity[1];
    const double sigma = std::hypot(err(0), err(1));
    report("6.feedforward", ff_ok && std::abs(diff) < 3.0 * sigma,
           fmt("both branches target Psi-; measured F1 - F2 = %.4f (3 sigma = %.4f)", diff, 3.0 * sigma) +
               fmt(", %.0f + %.0f deliveries", static_cast<double>(r.summary.successes_per_detector[0]),
                   static_cast<double>(r.summary.successes_per_detector[1])));
  }
  {
    Rng rng(5);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const OutcomeDistribution truth = test_support::random_distribution(rng, 0.05);
      const ReadoutModel model = ReadoutModel::symmetric(0.9 + 0.1 * rng.uniform(), 0.9 + 0.1 * rng.uniform());
      const auto resp = readout_response(model);
      OutcomeDistribution obs{};
      for (int o = 0; o < 4; ++o) {
        for (int t = 0; t < 4; ++t) obs[o] += resp[o][t] * truth[t];
      }
      const UnfoldResult u = unfold_readout(obs, model);
      for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(u.distribution[k] - truth[k]));
    }
    report("6.unfolding", worst < 1e-3, fmt("worst round-trip error %.2e per bin over 1000 cases (< 1e-3)", worst));
  }
  {
    int causal = 0, deterministic = 0;
    std::string first;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const bool he = seed % 2 == 1;
      LinkSimConfig c;
      c.physics = he ? heralded_parameters() : delayed_choice_parameters();
      c.seed = seed;
      c.duration_s = 0.5;
      c.forced_success_probability = he ? 0.05 : 0.01;
      const LinkMode m = he ? LinkMode::kHeralded : LinkMode::kPostSelected;
      EventLog a, b;
      const RunResult r = run_link(m, c, {&a});
      run_link(m, c, {&b});
      const auto rep = test_support::check_causality(a.events(), c.topology, he);
      if (rep.ok && rep.delivered == r.summary.successes && rep.delivered > 0) {
        ++causal;
      } else if (first.empty()) {
        first = rep.violation;
      }
      if (a.events() == b.events() && summary_to_json(summarize_events(a.events())) == summary_to_json(r.summary)) {
        ++deterministic;
      }
    }
    report("6.causality", causal == 100, fmt("%.0f/100 seeded runs causal", causal) + (first.empty() ? "" : " (" + first + ")"));
    report("6.determinism", deterministic == 100,
           fmt("%.0f/100 seeded runs reproduce identical logs and summaries", deterministic));
  }
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void()>> sections[] = {
      {"fidelity reproduction", fidelity_reproduction},
      {"error budget", error_budget_reproduction},
      {"improvement scenarios", improvement_scenarios_check},
      {"rates", rates},
      {"drift and feedback", drift_and_feedback},
      {"property suites", property_suites},
  };
  for (const auto& [name, fn] : sections) {
    std::printf("# %s\n", name);
    try {
      fn();
    } catch (const std::exception& e) {
      report(name, false, std::string("threw: ") + e.what());
    }
  }
  std::printf("# %d failing check(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
