#include "qlink/sim/coherence.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qlink {

NodeCoherence NodeCoherence::calibrated(double revival_period_us, double wait_us, double contrast,
                                        double revival_width_us, double exponent) {
  if (!(contrast > 0.0 && contrast <= 1.0) || !(wait_us > 0.0)) {
    throw std::invalid_argument("NodeCoherence: need contrast in (0, 1] and wait > 0");
  }
  NodeCoherence c;
  c.revival_period_us = revival_period_us;
  c.revival_width_us = revival_width_us;
  c.decay_exponent = exponent;
  c.decay_time_us = contrast == 1.0 ? INFINITY : wait_us / std::pow(-std::log(contrast), 1.0 / exponent);
  return c;
}

double coherence_envelope(const CoherenceModel& model, Node node, double wait_us) {
  if (!(wait_us >= 0.0)) throw std::invalid_argument("coherence_envelope: wait must be >= 0");
  const NodeCoherence& c = model.node[static_cast<int>(node)];
  const double decay = std::isinf(c.decay_time_us) ? 1.0 : std::exp(-std::pow(wait_us / c.decay_time_us, c.decay_exponent));
  const double k = std::round(wait_us / c.revival_period_us);
  const double off = (wait_us - k * c.revival_period_us) / c.revival_width_us;
  return decay * std::exp(-off * off);
}

double first_revival_at_or_after(const CoherenceModel& model, Node node, double earliest_us) {
  const double period = model.node[static_cast<int>(node)].revival_period_us;
  if (!(period > 0.0)) throw std::invalid_argument("first_revival_at_or_after: revival period must be > 0");
  const double k = std::max(1.0, std::ceil(earliest_us / period - 1e-12));
  return k * period;
}

double effective_dephasing(double base_dephasing, double contrast) {
  return 1.0 - (1.0 - base_dephasing) * contrast;
}

}  // namespace qlink
