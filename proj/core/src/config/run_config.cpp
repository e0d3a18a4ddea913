#include "qlink/config/run_config.h"

#include "qlink/util/errors.h"
#include "qlink/util/rng.h"

#include <json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace qlink {

using nlohmann::ordered_json;

namespace {

// JSON pointer of every object key -> 1-based line of the key.
std::map<std::string, int> key_lines(const std::string& text) {
  struct Frame {
    bool object;
    std::string path;
    int index = 0;
    bool expect_key = true;
    std::string key;
  };
  std::map<std::string, int> out;
  std::vector<Frame> stack;
  int line = 1;
  const auto value_path = [&]() -> std::string {
    if (stack.empty()) return "";
    const Frame& f = stack.back();
    return f.object ? f.path + "/" + f.key : f.path + "/" + std::to_string(f.index);
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
    } else if (c == '"') {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\' && i + 1 < text.size()) ++i;
        if (text[i] == '\n') ++line;
        s.push_back(text[i]);
      }
      if (!stack.empty() && stack.back().object && stack.back().expect_key) {
        stack.back().key = s;
        stack.back().expect_key = false;
        out.emplace(stack.back().path + "/" + s, line);
      }
    } else if (c == '{' || c == '[') {
      stack.push_back(Frame{c == '{', value_path(), 0, true, {}});
    } else if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
    } else if (c == ',' && !stack.empty()) {
      if (stack.back().object) {
        stack.back().expect_key = true;
      } else {
        ++stack.back().index;
      }
    }
  }
  return out;
}

struct Context {
  std::string source;
  std::map<std::string, int> lines;
};

class Reader {
 public:
  Reader(const ordered_json& j, std::string path, const Context& ctx) : j_(j), path_(std::move(path)), ctx_(ctx) {
    if (!j_.is_object()) fail_at(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  void num(const std::string& key, double& v) {
    if (const ordered_json* x = take(key)) {
      if (!x->is_number()) fail(key, "expected a number");
      v = x->get<double>();
    }
  }
  void integer(const std::string& key, int& v) {
    if (const ordered_json* x = take(key)) {
      if (!x->is_number_integer()) fail(key, "expected an integer");
      v = x->get<int>();
    }
  }
  void u64(const std::string& key, std::uint64_t& v) {
    if (const ordered_json* x = take(key)) {
      if (!x->is_number_unsigned() && !(x->is_number_integer() && x->get<std::int64_t>() >= 0)) {
        fail(key, "expected a non-negative integer");
      }
      v = x->get<std::uint64_t>();
    }
  }
  void boolean(const std::string& key, bool& v) {
    if (const ordered_json* x = take(key)) {
      if (!x->is_boolean()) fail(key, "expected true or false");
      v = x->get<bool>();
    }
  }
  void str(const std::string& key, std::string& v) {
    if (const ordered_json* x = take(key)) {
      if (!x->is_string()) fail(key, "expected a string");
      v = x->get<std::string>();
    }
  }
  template <std::size_t N, typename T>
  void fixed(const std::string& key, std::array<T, N>& v) {
    if (const ordered_json* x = take(key)) {
      if (!x->is_array() || x->size() != N) fail(key, "expected an array of " + std::to_string(N));
      for (std::size_t i = 0; i < N; ++i) {
        const ordered_json& e = (*x)[i];
        if constexpr (std::is_same_v<T, bool>) {
          if (!e.is_boolean()) fail(key, "expected booleans");
        } else {
          if (!e.is_number()) fail(key, "expected numbers");
        }
        v[i] = e.get<T>();
      }
    }
  }
  void list(const std::string& key, std::vector<double>& v) {
    if (const ordered_json* x = take(key)) {
      if (!x->is_array()) fail(key, "expected an array");
      v.clear();
      for (const auto& e : *x) {
        if (!e.is_number()) fail(key, "expected numbers");
        v.push_back(e.get<double>());
      }
    }
  }

  Reader child(const std::string& key) {
    static const ordered_json kEmpty = ordered_json::object();
    if (const ordered_json* x = take(key)) {
      if (!x->is_object()) fail(key, "expected an object");
      return Reader(*x, path_ + "/" + key, ctx_);
    }
    return Reader(kEmpty, path_ + "/" + key, ctx_);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      (void)v;
      if (!seen_.count(k)) {
        fail_at(path_ + "/" + k, "unknown key '" + k + "'" + (path_.empty() ? "" : " in " + path_));
      }
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    fail_at(path_ + "/" + key, "'" + key + "': " + msg);
  }

 private:
  const ordered_json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  [[noreturn]] void fail_at(const std::string& pointer, const std::string& msg) const {
    std::string where = ctx_.source;
    auto it = ctx_.lines.find(pointer);
    if (it == ctx_.lines.end()) {
      // Fall back to the closest enclosing key.
      std::string p = pointer;
      while (!p.empty() && it == ctx_.lines.end()) {
        p = p.substr(0, p.rfind('/'));
        it = ctx_.lines.find(p);
      }
    }
    where += ":" + std::to_string(it == ctx_.lines.end() ? 1 : it->second);
    throw ConfigError(where + ": " + msg);
  }

  const ordered_json& j_;
  std::string path_;
  const Context& ctx_;
  std::set<std::string> seen_;
};

void read_physics(Reader r, LinkParameters& p) {
  r.fixed("detection_probability", p.detection_probability);
  r.fixed("alpha", p.alpha);
  r.fixed("background_rate_hz", p.background_rate_hz);
  r.fixed("double_excitation", p.double_excitation);
  r.num("phase_noise_std_deg", p.phase_noise_std_deg);
  r.fixed("dephasing", p.dephasing);
  r.num("spectral_diffusion_fwhm_mhz", p.spectral_diffusion_fwhm_mhz);
  r.num("mode_overlap", p.mode_overlap);
  r.num("window_ns", p.window_ns);
  r.num("rabi_angle_deg", p.rabi_angle_deg);
  r.fixed("ionization", p.ionization);
  r.fixed("psb_efficiency", p.psb_efficiency);
  r.num("decay_time_ns", p.decay_time_ns);
  r.num("detection_reference_window_ns", p.detection_reference_window_ns);
  r.fixed("ssro_fidelity", p.ssro_fidelity);
  r.finish();
}

ordered_json write_physics(const std::string& preset, const LinkParameters& p) {
  ordered_json j;
  j["preset"] = preset;
  j["detection_probability"] = p.detection_probability;
  j["alpha"] = p.alpha;
  j["background_rate_hz"] = p.background_rate_hz;
  j["double_excitation"] = p.double_excitation;
  j["phase_noise_std_deg"] = p.phase_noise_std_deg;
  j["dephasing"] = p.dephasing;
  j["spectral_diffusion_fwhm_mhz"] = p.spectral_diffusion_fwhm_mhz;
  j["mode_overlap"] = p.mode_overlap;
  j["window_ns"] = p.window_ns;
  j["rabi_angle_deg"] = p.rabi_angle_deg;
  j["ionization"] = p.ionization;
  j["psb_efficiency"] = p.psb_efficiency;
  j["decay_time_ns"] = p.decay_time_ns;
  j["detection_reference_window_ns"] = p.detection_reference_window_ns;
  j["ssro_fidelity"] = p.ssro_fidelity;
  return j;
}

void read_node_coherence(Reader r, NodeCoherence& c) {
  r.num("revival_period_us", c.revival_period_us);
  r.num("revival_width_us", c.revival_width_us);
  r.num("decay_exponent", c.decay_exponent);
  if (r.has("contrast")) {
    if (r.has("decay_time_us")) r.fail("contrast", "give either decay_time_us or contrast/contrast_wait_us");
    double contrast = 1.0;
    double wait = 0.0;
    r.num("contrast", contrast);
    r.num("contrast_wait_us", wait);
    try {
      c = NodeCoherence::calibrated(c.revival_period_us, wait, contrast, c.revival_width_us, c.decay_exponent);
    } catch (const std::invalid_argument& ex) {
      r.fail("contrast", ex.what());
    }
  } else {
    r.num("decay_time_us", c.decay_time_us);
  }
  r.finish();
}

ordered_json write_node_coherence(const NodeCoherence& c) {
  ordered_json j;
  j["revival_period_us"] = c.revival_period_us;
  j["revival_width_us"] = c.revival_width_us;
  j["decay_exponent"] = c.decay_exponent;
  j["decay_time_us"] = c.decay_time_us;
  return j;
}

template <typename F>
void checked(const char* section, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string(section) + ": " + ex.what());
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& ex) {
    int line = 1;
    for (std::size_t i = 0; i < ex.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ConfigError(source + ":" + std::to_string(line) + ": malformed JSON (" + ex.what() + ")");
  }
  const Context ctx{source, key_lines(text)};
  Reader root(j, "", ctx);
  RunConfig c;

  root.str("name", c.name);
  std::string mode = to_string(c.mode);
  root.str("mode", mode);
  try {
    c.mode = link_mode_from_string(mode);
  } catch (const ConfigError& ex) {
    root.fail("mode", ex.what());
  }
  root.u64("seed", c.seed);
  root.str("out", c.out);
  root.num("duration_s", c.duration_s);
  root.boolean("log_handshake", c.log_handshake);
  root.str("scenario", c.scenario);
  if (c.scenario != "measured" && c.scenario != "near-term" && c.scenario != "future") {
    root.fail("scenario", "unknown scenario '" + c.scenario + "' (measured, near-term, future)");
  }
  root.list("sweep_windows_ns", c.sweep_windows_ns);

  {
    Reader r = root.child("topology");
    r.fixed("tof_us", c.topology.tof_us);
    r.fixed("loss_db", c.topology.loss_db);
    r.num("heartbeat_us", c.topology.heartbeat_us);
    r.num("photon_slot_us", c.topology.photon_slot_us);
    r.num("clock_jitter_ps", c.topology.clock_jitter_ps);
    r.finish();
  }
  c.skew.calibrated_tof_us = c.topology.tof_us;
  {
    Reader r = root.child("skew");
    r.fixed("calibrated_tof_us", c.skew.calibrated_tof_us);
    r.num("budget_ps", c.skew.budget_ps);
    r.finish();
  }
  {
    Reader r = root.child("schedule");
    NodeSchedule& s = c.schedule;
    r.num("cr_check_duration_us", s.cr_check_duration_us);
    r.num("cr_pass_probability", s.cr_pass_probability);
    r.integer("stabilization_heartbeats", s.stabilization_heartbeats);
    r.integer("rounds_per_block", s.rounds_per_block);
    r.integer("phase_refresh_cadence", s.phase_refresh_cadence);
    r.num("heralded_attempt_period_us", s.heralded_attempt_period_us);
    r.fixed("echo_time_us", s.echo_time_us);
    r.integer("max_heralded_attempts", s.max_heralded_attempts);
    r.integer("hold_heartbeats", s.hold_heartbeats);
    r.num("readout_duration_us", s.readout_duration_us);
    r.fixed("base_dephasing", s.base_dephasing);
    r.finish();
  }
  {
    Reader r = root.child("physics");
    r.str("preset", c.physics_preset);
    try {
      c.physics = named_parameters(c.physics_preset);
    } catch (const std::exception&) {
      r.fail("preset", "unknown parameter preset '" + c.physics_preset + "'");
    }
    read_physics(r, c.physics);
  }
  {
    Reader r = root.child("coherence");
    read_node_coherence(r.child("delft"), c.coherence.node[0]);
    read_node_coherence(r.child("hague"), c.coherence.node[1]);
    r.finish();
  }
  {
    Reader r = root.child("phase");
    r.num("optical_setpoint_deg", c.optical_setpoint_deg);
    r.num("entangled_phase_offset_deg", c.entangled_phase_offset_deg);
    r.num("phase_correction_deg", c.phase_correction_deg);
    r.finish();
  }
  {
    Reader d = root.child("drift");
    {
      Reader r = d.child("timing");
      TimingDriftConfig& t = c.drift.timing;
      r.num("step_ps_per_sqrt_s", t.step_ps_per_sqrt_s);
      r.num("correction_interval_s", t.correction_interval_s);
      r.num("bound_ps", t.bound_ps);
      r.num("duration_s", t.duration_s);
      r.num("dt_s", t.dt_s);
      r.num("bin_ps", t.bin_ps);
      r.finish();
    }
    {
      Reader r = d.child("frequency");
      FrequencyDriftConfig& f = c.drift.frequency;
      r.num("step_mhz_per_sqrt_s", f.step_mhz_per_sqrt_s);
      r.num("duration_s", f.duration_s);
      r.num("dt_s", f.dt_s);
      r.num("fast_range_mhz", f.desaturation.fast_range_mhz);
      r.num("slow_rate_hz", f.desaturation.slow_rate_hz);
      r.num("slow_range_mhz", f.desaturation.slow_range_mhz);
      r.boolean("slow_enabled", f.desaturation.slow_enabled);
      r.num("bin_mhz", f.bin_mhz);
      r.finish();
    }
    {
      Reader r = d.child("phase");
      PhaseDriftConfig& p = c.drift.phase;
      r.num("noise_scale", p.noise_scale);
      r.fixed("loops_enabled", p.loops_enabled);
      r.u64("samples", p.samples);
      r.finish();
    }
    {
      Reader r = d.child("polarization");
      PolarizationChannelConfig& p = c.drift.polarization;
      r.num("diffusion_deg_per_sqrt_s", p.drift.diffusion_deg_per_sqrt_s);
      r.num("duration_s", p.drift.duration_s);
      r.num("dt_s", p.drift.dt_s);
      r.num("feedback_rate_hz", p.feedback.feedback_rate_hz);
      r.num("dither_deg", p.feedback.dither_deg);
      r.num("gain", p.feedback.gain);
      r.num("measurement_noise", p.feedback.measurement_noise);
      r.num("target_overlap", p.feedback.target_overlap);
      r.num("bin_width", p.feedback.bin_width);
      r.finish();
    }
    d.finish();
  }
  {
    c.calibration.thresholds = default_thresholds(c.physics, c.mode == LinkMode::kHeralded);
    Reader r = root.child("calibration");
    CalibrationConfig& k = c.calibration;
    {
      Reader t = r.child("thresholds");
      t.num("min_cps_tel", k.thresholds.min_cps_tel);
      t.num("min_contrast", k.thresholds.min_contrast);
      t.num("max_xsweep_err_deg", k.thresholds.max_xsweep_err_deg);
      t.u64("fid_block_cr_checks", k.thresholds.fid_block_cr_checks);
      t.num("cr_rate_reference", k.thresholds.cr_rate_reference);
      t.finish();
    }
    r.u64("snr_shots", k.snr_shots);
    r.u64("snr_cr_checks", k.snr_cr_checks);
    r.list("fringe_setpoints_deg", k.fringe_setpoints_deg);
    r.num("flux_ratio", k.fringe.flux_ratio);
    r.u64("fringe_counts_per_point", k.fringe.counts_per_point);
    r.num("fringe_offset_deg", k.fringe.fringe_offset_deg);
    r.list("xsweep_angles_deg", k.xsweep.angles_deg);
    r.u64("xsweep_heralds_per_angle", k.xsweep.heralds_per_angle);
    r.integer("fid_blocks", k.fid_blocks);
    r.integer("max_cycles", k.max_cycles);
    r.num("attempt_success_probability", k.attempt_success_probability);
    {
      Reader g = r.child("cr_degradation");
      g.boolean("enabled", k.degradation.enabled);
      g.u64("after_cr_checks", k.degradation.after_cr_checks);
      g.num("factor", k.degradation.factor);
      g.finish();
    }
    r.finish();
  }
  root.finish();

  checked("topology", [&] { c.topology.validate(); });
  checked("schedule", [&] { c.schedule.validate(); });
  checked("physics", [&] { c.physics.validate(); });
  c.calibration.thresholds.validate();
  if (!(c.duration_s >= 0.0)) throw ConfigError(source + ": duration_s must be >= 0");
  for (double w : c.sweep_windows_ns) {
    if (!(w > 0.0)) throw ConfigError(source + ": sweep windows must be > 0");
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path);
}

std::string serialize_run_config(const RunConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["duration_s"] = c.duration_s;
  j["log_handshake"] = c.log_handshake;
  j["scenario"] = c.scenario;
  j["sweep_windows_ns"] = c.sweep_windows_ns;
  j["topology"] = {{"tof_us", c.topology.tof_us},
                   {"loss_db", c.topology.loss_db},
                   {"heartbeat_us", c.topology.heartbeat_us},
                   {"photon_slot_us", c.topology.photon_slot_us},
                   {"clock_jitter_ps", c.topology.clock_jitter_ps}};
  j["skew"] = {{"calibrated_tof_us", c.skew.calibrated_tof_us}, {"budget_ps", c.skew.budget_ps}};
  const NodeSchedule& s = c.schedule;
  j["schedule"] = {{"cr_check_duration_us", s.cr_check_duration_us},
                   {"cr_pass_probability", s.cr_pass_probability},
                   {"stabilization_heartbeats", s.stabilization_heartbeats},
                   {"rounds_per_block", s.rounds_per_block},
                   {"phase_refresh_cadence", s.phase_refresh_cadence},
                   {"heralded_attempt_period_us", s.heralded_attempt_period_us},
                   {"echo_time_us", s.echo_time_us},
                   {"max_heralded_attempts", s.max_heralded_attempts},
                   {"hold_heartbeats", s.hold_heartbeats},
                   {"readout_duration_us", s.readout_duration_us},
                   {"base_dephasing", s.base_dephasing}};
  j["physics"] = write_physics(c.physics_preset, c.physics);
  j["coherence"] = {{"delft", write_node_coherence(c.coherence.node[0])},
                    {"hague", write_node_coherence(c.coherence.node[1])}};
  j["phase"] = {{"optical_setpoint_deg", c.optical_setpoint_deg},
                {"entangled_phase_offset_deg", c.entangled_phase_offset_deg},
                {"phase_correction_deg", c.phase_correction_deg}};
  const DriftConfig& d = c.drift;
  ordered_json drift;
  drift["timing"] = {{"step_ps_per_sqrt_s", d.timing.step_ps_per_sqrt_s},
                     {"correction_interval_s", d.timing.correction_interval_s},
                     {"bound_ps", d.timing.bound_ps},
                     {"duration_s", d.timing.duration_s},
                     {"dt_s", d.timing.dt_s},
                     {"bin_ps", d.timing.bin_ps}};
  drift["frequency"] = {{"step_mhz_per_sqrt_s", d.frequency.step_mhz_per_sqrt_s},
                        {"duration_s", d.frequency.duration_s},
                        {"dt_s", d.frequency.dt_s},
                        {"fast_range_mhz", d.frequency.desaturation.fast_range_mhz},
                        {"slow_rate_hz", d.frequency.desaturation.slow_rate_hz},
                        {"slow_range_mhz", d.frequency.desaturation.slow_range_mhz},
                        {"slow_enabled", d.frequency.desaturation.slow_enabled},
                        {"bin_mhz", d.frequency.bin_mhz}};
  drift["phase"] = {{"noise_scale", d.phase.noise_scale},
                    {"loops_enabled", d.phase.loops_enabled},
                    {"samples", d.phase.samples}};
  drift["polarization"] = {{"diffusion_deg_per_sqrt_s", d.polarization.drift.diffusion_deg_per_sqrt_s},
                           {"duration_s", d.polarization.drift.duration_s},
                           {"dt_s", d.polarization.drift.dt_s},
                           {"feedback_rate_hz", d.polarization.feedback.feedback_rate_hz},
                           {"dither_deg", d.polarization.feedback.dither_deg},
                           {"gain", d.polarization.feedback.gain},
                           {"measurement_noise", d.polarization.feedback.measurement_noise},
                           {"target_overlap", d.polarization.feedback.target_overlap},
                           {"bin_width", d.polarization.feedback.bin_width}};
  j["drift"] = drift;
  const CalibrationConfig& k = c.calibration;
  ordered_json cal;
  cal["thresholds"] = {{"min_cps_tel", k.thresholds.min_cps_tel},
                       {"min_contrast", k.thresholds.min_contrast},
                       {"max_xsweep_err_deg", k.thresholds.max_xsweep_err_deg},
                       {"fid_block_cr_checks", k.thresholds.fid_block_cr_checks},
                       {"cr_rate_reference", k.thresholds.cr_rate_reference}};
  cal["snr_shots"] = k.snr_shots;
  cal["snr_cr_checks"] = k.snr_cr_checks;
  cal["fringe_setpoints_deg"] = k.fringe_setpoints_deg;
  cal["flux_ratio"] = k.fringe.flux_ratio;
  cal["fringe_counts_per_point"] = k.fringe.counts_per_point;
  cal["fringe_offset_deg"] = k.fringe.fringe_offset_deg;
  cal["xsweep_angles_deg"] = k.xsweep.angles_deg;
  cal["xsweep_heralds_per_angle"] = k.xsweep.heralds_per_angle;
  cal["fid_blocks"] = k.fid_blocks;
  cal["max_cycles"] = k.max_cycles;
  cal["attempt_success_probability"] = k.attempt_success_probability;
  cal["cr_degradation"] = {{"enabled", k.degradation.enabled},
                           {"after_cr_checks", k.degradation.after_cr_checks},
                           {"factor", k.degradation.factor}};
  j["calibration"] = cal;
  return j.dump(2) + "\n";
}

LinkSimConfig RunConfig::link_sim_config() const {
  LinkSimConfig s;
  s.topology = topology;
  s.schedule = schedule;
  s.skew = skew;
  s.physics = physics;
  s.coherence = coherence;
  s.duration_s = duration_s;
  s.seed = derive_seed(seed, "link_sim");
  s.state_phase_deg = optical_setpoint_deg + entangled_phase_offset_deg;
  s.phase_correction_deg = phase_correction_deg;
  s.log_handshake = log_handshake;
  return s;
}

CalibrationConfig RunConfig::calibration_config() const {
  CalibrationConfig k = calibration;
  const bool heralded = mode == LinkMode::kHeralded;
  k.physics = heralded ? heralded_physics(link_sim_config()) : physics;
  k.heralded = heralded;
  k.cr_pass_probability = schedule.cr_pass_probability;
  k.optical_setpoint_deg = optical_setpoint_deg;
  k.xsweep.entangled_phase_offset_deg = entangled_phase_offset_deg;
  k.seed = derive_seed(seed, "calibration");
  return k;
}

}  // namespace qlink
