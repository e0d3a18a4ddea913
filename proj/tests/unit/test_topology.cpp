#include "qlink/sim/coherence.h"
#include "qlink/sim/fpga_heralder.h"
#include "qlink/sim/topology.h"

#include <gtest/gtest.h>

#include <cmath>

namespace qlink {
namespace {

TimePs mod(TimePs a, TimePs m) { return ((a % m) + m) % m; }

TEST(Alignment, SymmetricLinkNeedsNoHold) {
  LinkTopology t;
  t.tof_us = {50.0, 50.0};
  const Alignment a = align_time_of_flight(t);
  EXPECT_EQ(a.hold_heartbeats, 0);
  EXPECT_EQ(a.hague_skew_ps, 0);
  EXPECT_EQ(a.misalignment_ps, 0);
  EXPECT_EQ(a.emission_offset_ps[0], a.emission_offset_ps[1]);
  EXPECT_TRUE(a.within_budget);
}

// Delft is 21.075 us farther: the Hague waits three heartbeats minus 8.925 us.
TEST(Alignment, DeployedTopology) {
  const LinkTopology t;
  const Alignment a = align_time_of_flight(t);
  EXPECT_EQ(a.hold_heartbeats, 3);
  EXPECT_EQ(a.hague_skew_ps, us_to_ps(-8.925));
  EXPECT_EQ(a.hold_heartbeats * t.heartbeat_ps() + a.hague_skew_ps, t.tof_ps(Node::kDelft) - t.tof_ps(Node::kHague));
  EXPECT_EQ(a.misalignment_ps, 0);
  // Both photons reach the midpoint together at the slot centre.
  const TimePs arr_d = a.emission_offset_ps[0] + t.tof_ps(Node::kDelft);
  const TimePs arr_h = a.emission_offset_ps[1] + t.tof_ps(Node::kHague);
  EXPECT_EQ(arr_d, arr_h);
  EXPECT_EQ(mod(arr_d, t.heartbeat_ps()), t.slot_center_phase_ps());
  EXPECT_EQ(a.arrival_ps, arr_d);
}

TEST(Alignment, UncorrectedDriftShowsUpAsMisalignment) {
  LinkTopology t;
  SkewCalibration cal{t.tof_us, 50.0};
  t.tof_us[0] += 100e-6;  // 100 ps
  Alignment a = align_time_of_flight(t, cal);
  EXPECT_EQ(a.misalignment_ps, 100);
  EXPECT_FALSE(a.within_budget);
  t.tof_us[0] = cal.calibrated_tof_us[0] + 40e-6;
  a = align_time_of_flight(t, cal);
  EXPECT_EQ(a.misalignment_ps, 40);
  EXPECT_TRUE(a.within_budget);
}

TEST(Alignment, HagueFartherAway) {
  LinkTopology t;
  t.tof_us = {40.0, 63.5};
  const Alignment a = align_time_of_flight(t);
  EXPECT_EQ(a.misalignment_ps, 0);
  EXPECT_GE(a.emission_offset_ps[0], 0);
  EXPECT_GE(a.emission_offset_ps[1], 0);
}

TEST(Alignment, HeraldPulsesArriveInPhase) {
  for (const auto& tof : {std::array<double, 2>{72.655, 51.58}, std::array<double, 2>{30.0, 47.25}}) {
    LinkTopology t;
    t.tof_us = tof;
    const auto d = herald_pulse_delays(t);
    EXPECT_EQ(mod(d[0] + t.tof_ps(Node::kDelft) - d[1] - t.tof_ps(Node::kHague), t.heartbeat_ps()), 0);
    for (TimePs x : d) {
      EXPECT_GE(x, 0);
      EXPECT_LT(x, t.heartbeat_ps());
    }
  }
  const auto paper = herald_pulse_delays(LinkTopology{});
  EXPECT_EQ(paper[0], 0);
  EXPECT_EQ(paper[1], us_to_ps(1.075));
}

TEST(Topology, ValidationRejectsNonsense) {
  LinkTopology t;
  t.photon_slot_us = 20.0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t = LinkTopology{};
  t.tof_us[1] = 0.0;
  EXPECT_THROW(align_time_of_flight(t), std::invalid_argument);
  NodeSchedule s;
  s.cr_pass_probability = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Coherence, RevivalContrast) {
  const CoherenceModel m;
  EXPECT_NEAR(coherence_envelope(m, Node::kDelft, 0.0), 1.0, 1e-12);
  EXPECT_NEAR(coherence_envelope(m, Node::kDelft, 164.0), 0.987, 1e-9);
  EXPECT_NEAR(coherence_envelope(m, Node::kHague, 136.0), 0.968, 1e-9);
  // Half-way between revivals the envelope collapses.
  EXPECT_LT(coherence_envelope(m, Node::kDelft, 164.0 + 20.5), 0.01);
  EXPECT_DOUBLE_EQ(first_revival_at_or_after(m, Node::kDelft, 140.0), 164.0);
  EXPECT_DOUBLE_EQ(first_revival_at_or_after(m, Node::kHague, 120.0), 136.0);
  EXPECT_DOUBLE_EQ(first_revival_at_or_after(m, Node::kHague, 136.0), 136.0);
  EXPECT_NEAR(effective_dephasing(0.01, 0.987), 1.0 - 0.99 * 0.987, 1e-12);
  EXPECT_DOUBLE_EQ(effective_dephasing(0.0, 1.0), 0.0);
}

class FpgaTest : public ::testing::Test {
 protected:
  LinkTopology topo;
  // Last 2 us of each 10 us heartbeat; window 15 ns from the slot centre.
  AcceptanceWindow window{us_to_ps(79.0), 15000};
};

TEST_F(FpgaTest, ClickInsideWindowHeralds) {
  const HeraldPulses h = fpga_heralder({{window.start_ps + 5000, 2}}, window, topo);
  EXPECT_TRUE(h.success);
  EXPECT_EQ(h.detector, 2);
  EXPECT_FALSE(h.dual_click);
  EXPECT_EQ(h.decision_ps, window.start_ps + window.length_ps);
  const auto d = herald_pulse_delays(topo);
  for (int j = 0; j < 2; ++j) {
    EXPECT_EQ(h.emission_ps[j], h.decision_ps + d[j]);
    EXPECT_EQ(h.arrival_ps[j], h.emission_ps[j] + topo.tof_ps(static_cast<Node>(j)));
  }
  EXPECT_EQ(mod(h.arrival_ps[0] - h.arrival_ps[1], topo.heartbeat_ps()), 0);
}

TEST_F(FpgaTest, ClickOutsideWindowIsIgnored) {
  EXPECT_FALSE(fpga_heralder({{window.start_ps + window.length_ps + 1000, 1}}, window, topo).success);
  EXPECT_FALSE(fpga_heralder({{window.start_ps - 1000, 1}}, window, topo).success);
  EXPECT_FALSE(fpga_heralder({}, window, topo).success);
}

TEST_F(FpgaTest, DualClickResolvesToDetectorOne) {
  const HeraldPulses h = fpga_heralder({{window.start_ps + 9000, 2}, {window.start_ps + 100, 1}}, window, topo);
  EXPECT_TRUE(h.success);
  EXPECT_TRUE(h.dual_click);
  EXPECT_EQ(h.detector, 1);
}

TEST_F(FpgaTest, JitterShiftsPulses) {
  const HeraldPulses a = fpga_heralder({{window.start_ps, 1}}, window, topo);
  const HeraldPulses b = fpga_heralder({{window.start_ps, 1}}, window, topo, {7, -3});
  EXPECT_EQ(b.arrival_ps[0] - a.arrival_ps[0], 7);
  EXPECT_EQ(b.arrival_ps[1] - a.arrival_ps[1], -3);
}

TEST_F(FpgaTest, WindowOutsideSlotRejected) {
  EXPECT_THROW(fpga_heralder({}, AcceptanceWindow{us_to_ps(72.0), 15000}, topo), std::invalid_argument);
  EXPECT_THROW(fpga_heralder({}, AcceptanceWindow{us_to_ps(79.999), 15000}, topo), std::invalid_argument);
  EXPECT_THROW(fpga_heralder({}, AcceptanceWindow{us_to_ps(79.0), 0}, topo), std::invalid_argument);
}

}  // namespace
}  // namespace qlink
