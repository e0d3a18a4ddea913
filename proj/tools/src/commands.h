#pragma once

#include "qlink/config/run_config.h"

#include <string>
#include <vector>

namespace qlink::cli {

// Each command writes its artifacts under config.out and returns the paths written.
struct CommandOutput {
  std::vector<std::string> files;
  std::string message;
};

CommandOutput cmd_simulate(const RunConfig& config);
// Recomputes the summary from a recorded event log; throws InvariantError on mismatch.
CommandOutput cmd_verify(const std::string& events_path, const std::string& summary_path);
CommandOutput cmd_sweep_window(const RunConfig& config, int threads = 1);
CommandOutput cmd_error_budget(const RunConfig& config);
CommandOutput cmd_drift(const RunConfig& config, const std::string& channel);
CommandOutput cmd_calibrate(const RunConfig& config);

// CSV text only (no files), used by the commands above.
std::string sweep_window_csv(const RunConfig& config, int threads = 1);
std::string error_budget_csv(const RunConfig& config);

std::vector<double> parse_window_list(const std::string& text);

}  // namespace qlink::cli
