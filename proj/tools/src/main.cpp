#include "commands.h"

#include "qlink/util/errors.h"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Run configuration (JSON)")->required();
  cmd->add_option("--seed", c.seed, "Override the configured seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--mode", c.mode, "post-selected | heralded");
}

qlink::RunConfig load(const Common& c) {
  qlink::RunConfig cfg = qlink::load_run_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.out = *c.out;
  if (c.mode) {
    cfg.mode = qlink::link_mode_from_string(*c.mode);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-node quantum link simulator"};
  app.require_subcommand(1);

  Common sim_opts, sweep_opts, budget_opts, drift_opts, cal_opts;
  std::string windows;
  std::string scenario;
  std::string channel;
  int threads = 1;
  std::string events_path, summary_path;

  auto* simulate = app.add_subcommand("simulate", "Run the link and write summary.json and events.ndjson");
  add_common(simulate, sim_opts);

  auto* sweep = app.add_subcommand("sweep-window", "Fidelity and rate versus acceptance window (CSV)");
  add_common(sweep, sweep_opts);
  sweep->add_option("--windows", windows, "Comma-separated windows in ns");
  sweep->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* budget = app.add_subcommand("error-budget", "Per-parameter infidelity table (CSV)");
  add_common(budget, budget_opts);
  budget->add_option("--scenario", scenario, "measured | near-term | future");

  auto* drift = app.add_subcommand("drift", "Free and stabilized drift histograms (CSV)");
  add_common(drift, drift_opts);
  drift->add_option("--channel", channel, "timing | phase | frequency | polarization")->required();

  auto* calibrate = app.add_subcommand("calibrate", "Run one calibration cycle and write the report");
  add_common(calibrate, cal_opts);

  auto* verify = app.add_subcommand("verify", "Recompute a summary from its event log");
  verify->add_option("--events", events_path, "events.ndjson")->required();
  verify->add_option("--summary", summary_path, "summary.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    qlink::cli::CommandOutput out;
    if (*simulate) {
      out = qlink::cli::cmd_simulate(load(sim_opts));
    } else if (*sweep) {
      qlink::RunConfig cfg = load(sweep_opts);
      if (sweep->count("--windows")) cfg.sweep_windows_ns = qlink::cli::parse_window_list(windows);
      out = qlink::cli::cmd_sweep_window(cfg, threads);
    } else if (*budget) {
      qlink::RunConfig cfg = load(budget_opts);
      if (budget->count("--scenario")) {
        if (scenario != "measured" && scenario != "near-term" && scenario != "future") {
          throw qlink::ConfigError("--scenario: unknown scenario '" + scenario + "'");
        }
        cfg.scenario = scenario;
      }
      out = qlink::cli::cmd_error_budget(cfg);
    } else if (*drift) {
      out = qlink::cli::cmd_drift(load(drift_opts), channel);
    } else if (*calibrate) {
      out = qlink::cli::cmd_calibrate(load(cal_opts));
    } else if (*verify) {
      out = qlink::cli::cmd_verify(events_path, summary_path);
    }
    for (const auto& f : out.files) std::cout << "wrote " << f << "\n";
    if (!out.message.empty()) std::cout << out.message << "\n";
    return 0;
  } catch (const qlink::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qlink::InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
