#include "qlink/sim/link_simulator.h"

#include "qlink/model/single_click.h"
#include "qlink/sim/fpga_heralder.h"
#include "qlink/util/errors.h"
#include "qlink/util/rng.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <queue>
#include <stdexcept>

namespace qlink {

std::string to_string(LinkMode mode) {
  return mode == LinkMode::kPostSelected ? "post-selected" : "heralded";
}

LinkMode link_mode_from_string(const std::string& s) {
  if (s == "post-selected" || s == "delayed-choice") return LinkMode::kPostSelected;
  if (s == "heralded") return LinkMode::kHeralded;
  throw ConfigError("unknown mode '" + s + "' (expected post-selected or heralded)");
}

namespace {

const char* kEntity[4] = {"controller", "delft", "hague", "midpoint"};
constexpr int kController = 0;
constexpr int kMidpoint = 3;
// Ordering rank only: delivery bookkeeping runs after node events at the same instant.
constexpr int kDeliveryRank = 4;
int node_entity(int j) { return 1 + j; }

const char* kBasisName[3] = {"X", "Y", "Z"};

int basis_index(const std::string& s) {
  for (int b = 0; b < 3; ++b) {
    if (s == kBasisName[b]) return b;
  }
  throw InvariantError("unknown basis '" + s + "' in event log");
}

TimePs ceil_to(TimePs t, TimePs period) {
  const TimePs r = t % period;
  return r == 0 ? t : t + (period - r);
}

// Single-threaded queue ordered by (time, entity, insertion).
class EventLoop {
 public:
  void schedule(TimePs t, int entity, std::function<void()> fn) {
    q_.push(Item{t, entity, seq_++, std::move(fn)});
  }
  void run_until(TimePs end) {
    while (!q_.empty() && q_.top().time <= end) {
      Item it = q_.top();
      q_.pop();
      now_ = it.time;
      it.fn();
    }
  }
  TimePs now() const { return now_; }

 private:
  struct Item {
    TimePs time;
    int entity;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.entity != b.entity) return a.entity > b.entity;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Item, std::vector<Item>, Later> q_;
  std::uint64_t seq_ = 0;
  TimePs now_ = 0;
};

// A negative hold in the schedule means "derive from the topology".
Alignment checked_alignment(const LinkSimConfig& config) {
  const Alignment a = align_time_of_flight(config.topology, config.skew);
  if (config.schedule.hold_heartbeats >= 0 && config.schedule.hold_heartbeats != a.hold_heartbeats) {
    throw ConfigError("hold_heartbeats = " + std::to_string(config.schedule.hold_heartbeats) +
                      " but the time-of-flight difference needs " + std::to_string(a.hold_heartbeats));
  }
  return a;
}

struct BranchModel {
  std::array<TwoQubitState, 3> state;  // detector 1, detector 2, dual click
  std::array<double, 3> probability{};
  double total = 0.0;
};

double dual_click_probability(const LinkParameters& p) {
  const DetectionProbabilities d = detection_probabilities(p);
  const auto& n = d.noise_per_detector;
  const double half = (1.0 - d.signal_per_node[0] / 2.0) * (1.0 - d.signal_per_node[1] / 2.0);
  const double none_sig = (1.0 - d.signal_per_node[0]) * (1.0 - d.signal_per_node[1]);
  const double none = (1.0 - n[0]) * (1.0 - n[1]) * none_sig;
  return std::max(0.0, 1.0 - (1.0 - n[0]) * half - (1.0 - n[1]) * half + none);
}

BranchModel make_branches(const LinkParameters& physics, const LinkSimConfig& cfg) {
  BranchModel m;
  const HeraldedOutcome out = heralded_state(physics, cfg.state_phase_deg - cfg.phase_correction_deg);
  m.state = {out.state[0], out.state[1], out.state[0]};
  m.probability = {out.probability[0], out.probability[1], dual_click_probability(physics)};
  double sum = m.probability[0] + m.probability[1] + m.probability[2];
  if (cfg.forced_success_probability >= 0.0) {
    if (cfg.forced_success_probability > 1.0) throw ConfigError("forced success probability must be <= 1");
    if (sum > 0.0) {
      for (double& q : m.probability) q *= cfg.forced_success_probability / sum;
    } else {
      m.probability = {cfg.forced_success_probability / 2, cfg.forced_success_probability / 2, 0.0};
    }
    sum = cfg.forced_success_probability;
  }
  m.total = std::min(1.0, sum);
  return m;
}

class Simulation {
 public:
  Simulation(LinkMode mode, const LinkSimConfig& cfg, const std::vector<EventSink*>& sinks)
      : mode_(mode), cfg_(cfg), sinks_(sinks), rng_(cfg.seed) {
    cfg_.topology.validate();
    cfg_.schedule.validate();
    if (!(cfg_.duration_s >= 0.0) || !std::isfinite(cfg_.duration_s)) throw ConfigError("duration must be >= 0");
    sinks_.push_back(&aggregator_);
    rng_cr_ = rng_.split("cr_check");
    rng_success_ = rng_.split("success");
    rng_readout_ = rng_.split("readout");
    rng_jitter_ = rng_.split("jitter");
    end_ps_ = static_cast<TimePs>(std::llround(cfg_.duration_s * 1e12));
    hb_ = cfg_.topology.heartbeat_ps();
    align_ = checked_alignment(cfg_);
    latency_ps_ = cfg_.topology.tof_ps(Node::kDelft) + cfg_.topology.tof_ps(Node::kHague);
    window_ps_ = us_to_ps(cfg_.physics.window_ns * 1e-3);
    if (mode_ == LinkMode::kHeralded) {
      timing_ = heralded_timing(cfg_);
      physics_ = heralded_physics(cfg_);
      period_ps_ = timing_.attempt_period_ps;
    } else {
      physics_ = cfg_.physics;
      period_ps_ = hb_;
    }
    physics_.validate();
    readout_ = physics_.readout_model();
    branches_ = make_branches(physics_, cfg_);
  }

  RunResult run() {
    if (end_ps_ > 0) {
      Event e = make(0, kController, "run_start");
      e.payload = {{"mode", to_string(mode_)},
                   {"duration_ps", end_ps_},
                   {"seed", static_cast<std::int64_t>(cfg_.seed)},
                   {"attempt_period_ps", period_ps_},
                   {"success_probability", branches_.total},
                   {"ssro_delft", physics_.ssro_fidelity[0]},
                   {"ssro_hague", physics_.ssro_fidelity[1]},
                   {"target_sign_1", static_cast<std::int64_t>(target_sign(1))},
                   {"target_sign_2", static_cast<std::int64_t>(target_sign(2))},
                   {"misalignment_ps", align_.misalignment_ps}};
      if (mode_ == LinkMode::kHeralded) {
        e.payload.emplace_back("echo_delft_us", timing_.echo_time_us[0]);
        e.payload.emplace_back("echo_hague_us", timing_.echo_time_us[1]);
        e.payload.emplace_back("dephasing_delft", timing_.dephasing[0]);
        e.payload.emplace_back("dephasing_hague", timing_.dephasing[1]);
      }
      emit(e);
      start_block(0);
      loop_.run_until(end_ps_);
      emit(make(end_ps_, kController, "run_end"));
    }
    RunResult r;
    r.summary = aggregator_.finish();
    if (end_ps_ == 0) {
      r.summary.mode = to_string(mode_);
      r.summary.attempt_period_us = ps_to_us(period_ps_);
      r.summary.target_sign = {target_sign(1), target_sign(2)};
    }
    r.heralds = std::move(heralds_);
    r.delivered = std::move(delivered_);
    return r;
  }

 private:
  int target_sign(int detector) const { return mode_ == LinkMode::kHeralded ? -1 : heralded_sign(detector); }

  Event make(TimePs t, int entity, const char* type) const {
    Event e;
    e.time_ps = t;
    e.entity = kEntity[entity];
    e.event_type = type;
    return e;
  }

  void emit(const Event& e) {
    if (e.time_ps < last_emitted_) throw InvariantError("event log out of order at " + e.event_type);
    last_emitted_ = e.time_ps;
    for (EventSink* s : sinks_) s->on_event(e);
  }

  TimePs jitter() {
    const double j = cfg_.topology.clock_jitter_ps;
    return j > 0.0 ? static_cast<TimePs>(std::llround(rng_jitter_.normal(0.0, j))) : 0;
  }

  void start_block(TimePs t0) {
    const std::uint64_t block = block_++;
    const TimePs cr = us_to_ps(cfg_.schedule.cr_check_duration_us);
    std::array<std::int64_t, 2> tries{};
    std::array<TimePs, 2> pass{};
    for (int j = 0; j < 2; ++j) {
      tries[j] = static_cast<std::int64_t>(rng_cr_.geometric(cfg_.schedule.cr_pass_probability)) + 1;
      pass[j] = t0 + tries[j] * cr;
      loop_.schedule(pass[j], node_entity(j), [this, j, block, tries, pass] {
        Event e = make(pass[j], node_entity(j), "cr_pass");
        e.payload = {{"block", static_cast<std::int64_t>(block)}, {"attempts", tries[j]}};
        emit(e);
        if (cfg_.log_handshake) {
          Event s = make(pass[j], node_entity(j), "ready_sent");
          s.payload = {{"block", static_cast<std::int64_t>(block)}};
          emit(s);
        }
      });
      if (cfg_.log_handshake) {
        const int other = 1 - j;
        const TimePs recv = pass[j] + latency_ps_;
        loop_.schedule(recv, node_entity(other), [this, other, recv, block, pass, j] {
          Event e = make(recv, node_entity(other), "ready_received");
          e.payload = {{"block", static_cast<std::int64_t>(block)}, {"sent_ps", pass[j]}};
          emit(e);
        });
      }
    }
    // Both nodes resolve the same earliest heartbeat once each knows the other is ready.
    const TimePs start = ceil_to(std::max(pass[0], pass[1]) + latency_ps_, hb_);
    loop_.schedule(start, kController, [this, start, block, tries] { run_block(start, block, tries); });
  }

  void run_block(TimePs start, std::uint64_t block, std::array<std::int64_t, 2> tries) {
    Event e = make(start, kController, "block_start");
    e.payload = {{"block", static_cast<std::int64_t>(block)},
                 {"cr_attempts_delft", tries[0]},
                 {"cr_attempts_hague", tries[1]}};
    emit(e);

    const TimePs base = start + cfg_.schedule.stabilization_heartbeats * hb_;
    const std::int64_t max_attempts =
        mode_ == LinkMode::kHeralded ? cfg_.schedule.max_heralded_attempts : cfg_.schedule.rounds_per_block;
    // Attempts that start inside the run.
    std::int64_t available = 0;
    if (base <= end_ps_) available = std::min<std::int64_t>(max_attempts, (end_ps_ - base) / period_ps_ + 1);

    const std::uint64_t first = attempts_total_;
    std::int64_t attempts = 0;
    std::int64_t successes = 0;
    TimePs block_end = base + max_attempts * period_ps_;
    if (mode_ == LinkMode::kPostSelected) {
      attempts = available;
      std::int64_t k = 0;
      while (branches_.total > 0.0) {
        k += static_cast<std::int64_t>(rng_success_.geometric(branches_.total));
        if (k >= available) break;
        schedule_success(base + k * period_ps_, first + static_cast<std::uint64_t>(k));
        ++successes;
        ++k;
      }
    } else {
      std::int64_t k = branches_.total > 0.0 ? static_cast<std::int64_t>(std::min<std::uint64_t>(
                                                   rng_success_.geometric(branches_.total), max_attempts))
                                             : max_attempts;
      if (k < max_attempts && k < available) {
        attempts = k + 1;
        successes = 1;
        schedule_success(base + k * period_ps_, first + static_cast<std::uint64_t>(k));
        block_end = base + (k + 1) * period_ps_;
      } else {
        attempts = available;
      }
    }
    attempts_total_ += static_cast<std::uint64_t>(attempts);
    const bool truncated = block_end > end_ps_;
    const TimePs t_end = truncated ? end_ps_ : block_end;
    const std::int64_t refreshes = mode_ == LinkMode::kPostSelected ? attempts / cfg_.schedule.phase_refresh_cadence : 0;
    loop_.schedule(t_end, kController, [this, t_end, block, attempts, successes, refreshes, truncated] {
      Event b = make(t_end, kController, "block_end");
      b.payload = {{"block", static_cast<std::int64_t>(block)},
                   {"attempts", attempts},
                   {"sampled_successes", successes},
                   {"phase_refreshes", refreshes}};
      emit(b);
      if (!truncated) start_block(t_end);
    });
  }

  struct Pending {
    std::uint64_t attempt = 0;
    int branch = 0;  // 0, 1, 2 (dual)
    int detector = 0;
    bool dual = false;
    std::array<TimePs, 2> emission{};
    HeraldPulses pulses;
    std::array<TimePs, 2> poll{};
    std::array<TimePs, 2> readout{};
    Pauli basis = Pauli::kZ;
    int outcome = 0;
  };

  void schedule_success(TimePs attempt_start, std::uint64_t attempt) {
    auto p = std::make_shared<Pending>();
    p->attempt = attempt;
    p->branch = static_cast<int>(rng_success_.categorical(branches_.probability.data(), 3));
    p->dual = p->branch == 2;

    const std::array<TimePs, 2> offset =
        mode_ == LinkMode::kHeralded ? timing_.emission_offset_ps : align_.emission_offset_ps;
    for (int j = 0; j < 2; ++j) p->emission[j] = attempt_start + offset[j] + jitter();

    // Midpoint clicks inside the acceptance window.
    const AcceptanceWindow window{attempt_start + align_.arrival_ps, window_ps_};
    std::vector<ClickEvent> clicks;
    const TimePs t_click = window.start_ps + static_cast<TimePs>(rng_jitter_.uniform() * static_cast<double>(window_ps_));
    if (p->dual) {
      clicks = {{t_click, 1}, {t_click, 2}};
    } else {
      clicks = {{t_click, p->branch + 1}};
    }
    const std::array<TimePs, 2> pulse_jitter{jitter(), jitter()};
    p->pulses = fpga_heralder(clicks, window, cfg_.topology, pulse_jitter);
    p->detector = p->pulses.detector;

    const int b = static_cast<int>(rng_readout_.uniform() * 3.0) % 3;
    p->basis = static_cast<Pauli>(b);

    if (mode_ == LinkMode::kHeralded) {
      p->poll = {attempt_start + timing_.poll_ps[0], attempt_start + timing_.poll_ps[1]};
      for (int j = 0; j < 2; ++j) {
        p->readout[j] = attempt_start + timing_.emission_offset_ps[j] + us_to_ps(2.0 * timing_.echo_time_us[j]);
      }
    } else {
      for (int j = 0; j < 2; ++j) p->readout[j] = p->emission[j] + us_to_ps(1.0);
    }

    TwoQubitState state = branches_.state[p->branch];
    const bool ff = mode_ == LinkMode::kHeralded && p->detector == 1;
    if (ff) state = apply_detector_feedforward(state, p->detector);
    const OutcomeDistribution dist = apply_readout(state, readout_, p->basis, p->basis);
    p->outcome = static_cast<int>(rng_readout_.categorical(dist.data(), 4));

    for (int j = 0; j < 2; ++j) {
      loop_.schedule(p->emission[j], node_entity(j), [this, p, j] {
        Event e = make(p->emission[j], node_entity(j), "photon_emission");
        e.payload = {{"attempt", static_cast<std::int64_t>(p->attempt)}};
        emit(e);
      });
    }
    loop_.schedule(t_click, kMidpoint, [this, p, t_click] {
      Event e = make(t_click, kMidpoint, "click");
      e.payload = {{"attempt", static_cast<std::int64_t>(p->attempt)},
                   {"detector", static_cast<std::int64_t>(p->dual ? 0 : p->detector)}};
      emit(e);
    });
    loop_.schedule(p->pulses.decision_ps, kMidpoint, [this, p] {
      Event e = make(p->pulses.decision_ps, kMidpoint, "herald");
      e.payload = {{"attempt", static_cast<std::int64_t>(p->attempt)},
                   {"detector", static_cast<std::int64_t>(p->detector)},
                   {"dual_click", p->dual},
                   {"emission_delft_ps", p->pulses.emission_ps[0]},
                   {"emission_hague_ps", p->pulses.emission_ps[1]},
                   {"arrival_delft_ps", p->pulses.arrival_ps[0]},
                   {"arrival_hague_ps", p->pulses.arrival_ps[1]}};
      emit(e);
    });
    for (int j = 0; j < 2; ++j) {
      loop_.schedule(p->pulses.arrival_ps[j], node_entity(j), [this, p, j] {
        Event e = make(p->pulses.arrival_ps[j], node_entity(j), "herald_received");
        e.payload = {{"attempt", static_cast<std::int64_t>(p->attempt)},
                     {"detector", static_cast<std::int64_t>(p->detector)}};
        emit(e);
      });
      if (mode_ == LinkMode::kHeralded) {
        loop_.schedule(p->poll[j], node_entity(j), [this, p, j] {
          const bool seen = p->pulses.arrival_ps[j] <= p->poll[j];
          Event e = make(p->poll[j], node_entity(j), seen ? "poll" : "protocol_fault");
          e.payload = {{"attempt", static_cast<std::int64_t>(p->attempt)}, {"herald_seen", seen}};
          emit(e);
        });
      }
      loop_.schedule(p->readout[j], node_entity(j), [this, p, j] {
        Event e = make(p->readout[j], node_entity(j), "readout");
        const int bit = j == 0 ? p->outcome >> 1 : p->outcome & 1;
        e.payload = {{"attempt", static_cast<std::int64_t>(p->attempt)},
                     {"basis", std::string(kBasisName[static_cast<int>(p->basis)])},
                     {"bit", static_cast<std::int64_t>(bit)}};
        emit(e);
      });
    }

    // Delivered once both nodes hold the herald and their readout.
    TimePs t_deliver = std::max({p->pulses.arrival_ps[0], p->pulses.arrival_ps[1], p->readout[0], p->readout[1]});
    if (mode_ == LinkMode::kHeralded) t_deliver = std::max({t_deliver, p->poll[0], p->poll[1]});
    loop_.schedule(t_deliver, kDeliveryRank, [this, p, state, ff, t_deliver] {
      const int sign = target_sign(p->detector);
      DeliveredState d;
      d.herald_index = heralds_.size();
      d.detector = p->detector;
      d.feedforward_applied = ff;
      d.target_sign = sign;
      d.basis = p->basis;
      d.outcome = p->outcome;
      d.fidelity = bell_fidelity(state, sign, 0.0);
      d.state = state;
      d.state.validate(1e-8);

      HeraldRecord h;
      h.attempt_index = p->attempt;
      h.detector = p->detector;
      h.dual_click = p->dual;
      h.emission_ps = p->pulses.decision_ps;
      h.pulse_emission_ps = p->pulses.emission_ps;
      h.arrival_ps = p->pulses.arrival_ps;
      h.feedforward_applied = ff;
      h.delivered_index = delivered_.size();

      Event e = make(t_deliver, kController, "deliver");
      e.payload = {{"attempt", static_cast<std::int64_t>(p->attempt)},
                   {"detector", static_cast<std::int64_t>(p->detector)},
                   {"dual_click", p->dual},
                   {"feedforward", ff},
                   {"target_sign", static_cast<std::int64_t>(sign)},
                   {"basis", std::string(kBasisName[static_cast<int>(p->basis)])},
                   {"outcome", static_cast<std::int64_t>(p->outcome)},
                   {"fidelity", d.fidelity}};
      emit(e);
      heralds_.push_back(h);
      delivered_.push_back(std::move(d));
    });
  }

  LinkMode mode_;
  LinkSimConfig cfg_;
  std::vector<EventSink*> sinks_;
  SummaryAggregator aggregator_;
  Rng rng_;
  Rng rng_cr_{0};
  Rng rng_success_{0};
  Rng rng_readout_{0};
  Rng rng_jitter_{0};
  EventLoop loop_;
  TimePs end_ps_ = 0;
  TimePs hb_ = 0;
  TimePs period_ps_ = 0;
  TimePs latency_ps_ = 0;
  TimePs window_ps_ = 0;
  TimePs last_emitted_ = 0;
  Alignment align_;
  HeraldedTiming timing_;
  LinkParameters physics_;
  ReadoutModel readout_;
  BranchModel branches_;
  std::uint64_t block_ = 0;
  std::uint64_t attempts_total_ = 0;
  std::vector<HeraldRecord> heralds_;
  std::vector<DeliveredState> delivered_;
};

}  // namespace

HeraldedTiming heralded_timing(const LinkSimConfig& config) {
  const LinkTopology& topo = config.topology;
  topo.validate();
  config.schedule.validate();
  const Alignment a = checked_alignment(config);
  const TimePs hb = topo.heartbeat_ps();
  HeraldedTiming t;
  t.emission_offset_ps = a.emission_offset_ps;
  t.midpoint_arrival_ps = a.arrival_ps;
  const TimePs decision = a.arrival_ps + us_to_ps(config.physics.window_ns * 1e-3);
  const auto delays = herald_pulse_delays(topo);
  TimePs latest_end = 0;
  for (int j = 0; j < 2; ++j) {
    const Node n = static_cast<Node>(j);
    t.herald_arrival_ps[j] = decision + delays[j] + topo.tof_ps(n);
    t.poll_ps[j] = ceil_to(t.herald_arrival_ps[j], hb);
    const double earliest_wait_us = ps_to_us(t.poll_ps[j] - t.emission_offset_ps[j]);
    double echo = config.schedule.echo_time_us[j];
    if (2.0 * echo < earliest_wait_us) echo = first_revival_at_or_after(config.coherence, n, earliest_wait_us) / 2.0;
    t.echo_time_us[j] = echo;
    t.contrast[j] = coherence_envelope(config.coherence, n, 2.0 * echo);
    t.dephasing[j] = effective_dephasing(config.schedule.base_dephasing[j], t.contrast[j]);
    const TimePs end = t.emission_offset_ps[j] + us_to_ps(2.0 * echo + config.schedule.readout_duration_us);
    latest_end = std::max(latest_end, end);
  }
  // Each node idles until the shared period ends.
  t.attempt_period_ps = std::max(us_to_ps(config.schedule.heralded_attempt_period_us), ceil_to(latest_end, hb));
  return t;
}

LinkParameters heralded_physics(const LinkSimConfig& config) {
  const HeraldedTiming t = heralded_timing(config);
  LinkParameters p = config.physics;
  p.dephasing = t.dephasing;
  return p;
}

double attempt_success_probability(LinkMode mode, const LinkSimConfig& config) {
  const LinkParameters physics = mode == LinkMode::kHeralded ? heralded_physics(config) : config.physics;
  return make_branches(physics, config).total;
}

double expected_attempt_rate(LinkMode mode, const LinkSimConfig& config, double success_probability) {
  const NodeSchedule& s = config.schedule;
  s.validate();
  const TimePs hb = config.topology.heartbeat_ps();
  const double p_cr = s.cr_pass_probability;
  // Mean of the larger of two independent CR-check counts.
  const double checks = 2.0 / p_cr - 1.0 / (p_cr * (2.0 - p_cr));
  const TimePs cr = us_to_ps(s.cr_check_duration_us);
  const TimePs latency = config.topology.tof_ps(Node::kDelft) + config.topology.tof_ps(Node::kHague);
  // Blocks start on heartbeat boundaries; with heartbeat-aligned CR checks the rounding is exact.
  const double handshake = cr % hb == 0 ? static_cast<double>(ceil_to(latency, hb))
                                        : static_cast<double>(latency) + 0.5 * static_cast<double>(hb);
  const double overhead = checks * static_cast<double>(cr) + handshake + s.stabilization_heartbeats * static_cast<double>(hb);
  double attempts = 0.0;
  double period = 0.0;
  if (mode == LinkMode::kPostSelected) {
    attempts = s.rounds_per_block;
    period = static_cast<double>(hb);
  } else {
    const double m = s.max_heralded_attempts;
    attempts = success_probability > 0.0 ? -std::expm1(m * std::log1p(-success_probability)) / success_probability : m;
    period = static_cast<double>(heralded_timing(config).attempt_period_ps);
  }
  return attempts / ((overhead + attempts * period) * 1e-12);
}

RunResult run_post_selected(const LinkSimConfig& config, const std::vector<EventSink*>& sinks) {
  return Simulation(LinkMode::kPostSelected, config, sinks).run();
}

RunResult run_heralded(const LinkSimConfig& config, const std::vector<EventSink*>& sinks) {
  return Simulation(LinkMode::kHeralded, config, sinks).run();
}

RunResult run_link(LinkMode mode, const LinkSimConfig& config, const std::vector<EventSink*>& sinks) {
  return Simulation(mode, config, sinks).run();
}

void SummaryAggregator::on_event(const Event& e) {
  const std::string& type = e.event_type;
  if (type == "run_start") {
    started_ = true;
    s_.mode = e.get_string("mode");
    s_.duration_s = ps_to_s(e.get_int("duration_ps"));
    s_.attempt_period_us = ps_to_us(e.get_int("attempt_period_ps"));
    readout_ = ReadoutModel::symmetric(e.get_double("ssro_delft"), e.get_double("ssro_hague"));
    s_.target_sign = {static_cast<int>(e.get_int("target_sign_1")), static_cast<int>(e.get_int("target_sign_2"))};
  } else if (type == "block_start") {
    ++s_.blocks;
    s_.cr_checks += static_cast<std::uint64_t>(e.get_int("cr_attempts_delft") + e.get_int("cr_attempts_hague"));
  } else if (type == "block_end") {
    s_.attempts += static_cast<std::uint64_t>(e.get_int("attempts"));
  } else if (type == "protocol_fault") {
    ++s_.protocol_faults;
  } else if (type == "deliver") {
    const int det = static_cast<int>(e.get_int("detector"));
    if (det != 1 && det != 2) throw InvariantError("deliver event with detector " + std::to_string(det));
    ++s_.successes;
    ++s_.successes_per_detector[det - 1];
    if (e.get_bool("dual_click")) ++s_.dual_clicks;
    const double f = e.get_double("fidelity");
    fidelity_sum_ += f;
    fidelity_sum_det_[det - 1] += f;
    const int b = basis_index(e.get_string("basis"));
    const auto o = e.get_int("outcome");
    if (o < 0 || o > 3) throw InvariantError("deliver event with outcome " + std::to_string(o));
    ++s_.correlator_counts[det - 1][b].counts[o];
  }
}

RunSummary SummaryAggregator::finish() const {
  RunSummary s = s_;
  if (s.duration_s > 0.0) {
    s.rate_hz = static_cast<double>(s.successes) / s.duration_s;
    s.attempt_rate_hz = static_cast<double>(s.attempts) / s.duration_s;
  }
  if (s.successes > 0) s.fidelity = fidelity_sum_ / static_cast<double>(s.successes);
  std::array<bool, 2> complete{true, true};
  for (int d = 0; d < 2; ++d) {
    if (s.successes_per_detector[d] > 0) {
      s.fidelity_per_detector[d] = fidelity_sum_det_[d] / static_cast<double>(s.successes_per_detector[d]);
    }
    for (int b = 0; b < 3; ++b) {
      const BasisCounts& c = s.correlator_counts[d][b];
      const double n = static_cast<double>(c.total());
      if (n == 0.0) {
        complete[d] = false;
        continue;
      }
      OutcomeDistribution raw{};
      for (int o = 0; o < 4; ++o) raw[o] = static_cast<double>(c.counts[o]) / n;
      const CorrelatorEstimate r = correlator_from_distribution(raw, n);
      const CorrelatorEstimate u = correlator_from_distribution(unfold_readout(raw, readout_).distribution, n);
      s.correlator_raw[d][b] = r.value;
      s.correlator_corrected[d][b] = u.value;
      s.correlator_err[d][b] = r.std_error;
    }
    if (complete[d]) {
      CorrelatorTriple t;
      t.xx = s.correlator_corrected[d][0];
      t.yy = s.correlator_corrected[d][1];
      t.zz = s.correlator_corrected[d][2];
      s.measured_fidelity[d] = fidelity_from_correlators(t, s.target_sign[d]);
    }
  }
  if (complete[0] && complete[1]) {
    s.measured_fidelity_mean = 0.5 * (s.measured_fidelity[0] + s.measured_fidelity[1]);
  }
  return s;
}

RunSummary summarize_events(const std::vector<Event>& events) {
  SummaryAggregator agg;
  for (const Event& e : events) agg.on_event(e);
  return agg.finish();
}

std::string summary_to_json(const RunSummary& s) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["mode"] = s.mode;
  j["duration_s"] = s.duration_s;
  j["blocks"] = s.blocks;
  j["cr_checks"] = s.cr_checks;
  j["attempts"] = s.attempts;
  j["successes"] = s.successes;
  j["successes_per_detector"] = s.successes_per_detector;
  j["dual_clicks"] = s.dual_clicks;
  j["protocol_faults"] = s.protocol_faults;
  j["rate_hz"] = s.rate_hz;
  j["attempt_rate_hz"] = s.attempt_rate_hz;
  j["attempt_period_us"] = s.attempt_period_us;
  j["fidelity"] = s.fidelity;
  j["fidelity_per_detector"] = s.fidelity_per_detector;
  j["target_sign"] = s.target_sign;
  ordered_json corr = ordered_json::object();
  for (int d = 0; d < 2; ++d) {
    ordered_json det = ordered_json::object();
    for (int b = 0; b < 3; ++b) {
      ordered_json c;
      c["counts"] = s.correlator_counts[d][b].counts;
      c["raw"] = s.correlator_raw[d][b];
      c["corrected"] = s.correlator_corrected[d][b];
      c["std_error"] = s.correlator_err[d][b];
      det[std::string(kBasisName[b]) + kBasisName[b]] = c;
    }
    det["measured_fidelity"] = s.measured_fidelity[d];
    corr["detector_" + std::to_string(d + 1)] = det;
  }
  j["correlators"] = corr;
  j["measured_fidelity_mean"] = s.measured_fidelity_mean;
  return j.dump(2);
}

}  // namespace qlink
