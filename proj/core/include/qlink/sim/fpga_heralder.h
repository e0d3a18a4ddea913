#pragma once

#include "qlink/sim/topology.h"

#include <array>
#include <vector>

namespace qlink {

struct ClickEvent {
  TimePs time_ps = 0;
  int detector = 1;  // 1 or 2
};

struct AcceptanceWindow {
  TimePs start_ps = 0;
  TimePs length_ps = 0;
};

struct HeraldPulses {
  bool success = false;
  int detector = 0;  // 0 when no herald
  bool dual_click = false;
  TimePs decision_ps = 0;
  std::array<TimePs, 2> emission_ps{};  // per arm, at the midpoint
  std::array<TimePs, 2> arrival_ps{};   // at the nodes
};

// Decision at the end of the window. Dual clicks resolve to detector 1.
// `jitter_ps` is added to each arm's pulse emission time.
HeraldPulses fpga_heralder(const std::vector<ClickEvent>& clicks, const AcceptanceWindow& window,
                           const LinkTopology& topology, const std::array<TimePs, 2>& jitter_ps = {0, 0});

}  // namespace qlink
