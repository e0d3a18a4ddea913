#pragma once

#include "qlink/quantum/two_qubit_state.h"

#include <array>

namespace qlink {

// Gaussian revivals at multiples of the revival period under a stretched-exponential decay.
struct NodeCoherence {
  double revival_period_us = 41.0;
  double revival_width_us = 4.0;
  double decay_time_us = 700.0;
  double decay_exponent = 3.0;

  // Decay time chosen so the envelope equals `contrast` at `wait_us` (a revival).
  static NodeCoherence calibrated(double revival_period_us, double wait_us, double contrast,
                                  double revival_width_us = 4.0, double exponent = 3.0);
};

struct CoherenceModel {
  std::array<NodeCoherence, 2> node{NodeCoherence::calibrated(41.0, 164.0, 0.987),
                                    NodeCoherence::calibrated(34.0, 136.0, 0.968)};
};

double coherence_envelope(const CoherenceModel& model, Node node, double wait_us);

// First revival time (total echo duration) at or after `earliest_us`.
double first_revival_at_or_after(const CoherenceModel& model, Node node, double earliest_us);

// Dephasing probability combining base memory dephasing with the echo contrast.
double effective_dephasing(double base_dephasing, double contrast);

}  // namespace qlink
