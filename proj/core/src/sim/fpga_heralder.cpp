#include "qlink/sim/fpga_heralder.h"

#include <stdexcept>

namespace qlink {

HeraldPulses fpga_heralder(const std::vector<ClickEvent>& clicks, const AcceptanceWindow& window,
                           const LinkTopology& topology, const std::array<TimePs, 2>& jitter_ps) {
  const TimePs hb = topology.heartbeat_ps();
  const TimePs slot = us_to_ps(topology.photon_slot_us);
  if (window.length_ps <= 0) throw std::invalid_argument("fpga_heralder: window length must be > 0");
  TimePs phase = window.start_ps % hb;
  if (phase < 0) phase += hb;
  if (phase < hb - slot || phase + window.length_ps > hb) {
    throw std::invalid_argument("fpga_heralder: acceptance window must lie inside the photon slot");
  }

  HeraldPulses out;
  out.decision_ps = window.start_ps + window.length_ps;
  bool seen[2] = {false, false};
  for (const ClickEvent& c : clicks) {
    if (c.detector != 1 && c.detector != 2) throw std::invalid_argument("fpga_heralder: detector must be 1 or 2");
    if (c.time_ps >= window.start_ps && c.time_ps < out.decision_ps) seen[c.detector - 1] = true;
  }
  if (!seen[0] && !seen[1]) return out;

  out.success = true;
  out.dual_click = seen[0] && seen[1];
  out.detector = seen[0] ? 1 : 2;  // fixed priority on dual clicks
  const auto delays = herald_pulse_delays(topology);
  for (int j = 0; j < 2; ++j) {
    out.emission_ps[j] = out.decision_ps + delays[j] + jitter_ps[j];
    out.arrival_ps[j] = out.emission_ps[j] + topology.tof_ps(static_cast<Node>(j));
  }
  return out;
}

}  // namespace qlink
