#pragma once

#include "qlink/model/link_parameters.h"
#include "qlink/quantum/two_qubit_state.h"
#include "qlink/util/rng.h"

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace qlink {

double window_signal_fraction(double window_ns, double decay_ns);

// Excitation probability of the optical pulse, sin^2(angle / 2).
double excitation_probability(double rabi_angle_deg);

// Per-node probability that an emitted photon reaches the beam splitter inside the window.
std::array<double, 2> collection_efficiency(const LinkParameters& p);

struct DetectionProbabilities {
  std::array<double, 2> signal_per_node{};     // node photon detected (either detector)
  std::array<double, 2> noise_per_detector{};  // background click inside the window
  std::array<double, 2> click_per_detector{};  // only this detector clicks
  double signal_total = 0.0;
  double noise_total = 0.0;
  double success_probability = 0.0;
};

DetectionProbabilities detection_probabilities(const LinkParameters& p);

// Infinity when there is no background.
double snr(const LinkParameters& p);

// Coherence of the A/B interference term from relative spectral diffusion,
// averaged over click times inside the window.
double spectral_diffusion_coherence(double fwhm_mhz, double window_ns, double decay_ns);

// Two-photon bunching visibility (mode overlap squared), averaged over detuning.
double two_photon_visibility(const LinkParameters& p);

struct HeraldedOutcome {
  // Unnormalized weights are folded into `probability`; states are 9-level and normalized.
  std::array<TwoQubitState, 2> state{TwoQubitState::maximally_mixed(9), TwoQubitState::maximally_mixed(9)};
  std::array<double, 2> probability{};
  double success_probability = 0.0;
  double snr = 0.0;
  double theta_deg = 0.0;

  // Fidelity of the detector branch to its heralded Bell state at theta.
  double fidelity(int detector) const;
  double mean_fidelity() const;
};

HeraldedOutcome heralded_state(const LinkParameters& p, double theta_deg = 0.0);

// Same enumeration, discarding heralds accompanied by a locally detected PSB photon.
HeraldedOutcome psb_false_herald_filter(const LinkParameters& p, double theta_deg = 0.0);

struct MonteCarloOptions {
  std::uint64_t samples = 200000;
  int batches = 40;
  bool apply_psb_filter = false;
};

struct MonteCarloEstimate {
  HeraldedOutcome outcome;
  std::array<double, 2> fidelity{};
  std::array<double, 2> fidelity_err{};
  std::array<double, 2> probability_err{};
  std::uint64_t samples = 0;
};

// Samples the classical environment (emission records, losses, ionization, phase,
// detuning, click time, phase flips, PSB catches) and averages the conditional states.
MonteCarloEstimate monte_carlo_heralded(const LinkParameters& p, double theta_deg, Rng& rng,
                                        const MonteCarloOptions& options = {});

struct WindowSweepPoint {
  double window_ns = 0.0;
  double fidelity = 0.0;
  double success_probability = 0.0;
  double rate_hz = 0.0;
  double snr = 0.0;
};

std::vector<WindowSweepPoint> window_sweep(const LinkParameters& p, const std::vector<double>& windows_ns,
                                           double attempt_rate_hz);

struct BudgetRow {
  std::string parameter;
  std::string value;
  double infidelity = 0.0;
};

struct ErrorBudget {
  std::vector<BudgetRow> rows;
  double total_infidelity = 0.0;
  double fidelity = 0.0;
};

// Each row: infidelity with only that imperfection switched on.
ErrorBudget error_budget(const LinkParameters& p);

// Parameters with every imperfection at its ideal value (reference for the budget).
LinkParameters ideal_parameters(const LinkParameters& p);

struct ScenarioResult {
  std::string name;
  LinkParameters parameters;
  double fidelity = 0.0;
  ErrorBudget budget;
};

std::vector<ScenarioResult> improvement_scenarios();

}  // namespace qlink
