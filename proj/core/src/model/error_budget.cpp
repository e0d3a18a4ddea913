#include "qlink/model/single_click.h"

#include <cstdio>
#include <string>

namespace qlink {

namespace {

std::string fmt_pair(const char* format, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

std::string fmt_one(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, a);
  return buf;
}

double infidelity(const LinkParameters& p) { return 1.0 - heralded_state(p).mean_fidelity(); }

}  // namespace

LinkParameters ideal_parameters(const LinkParameters& p) {
  LinkParameters q = p;
  const double mean_det = 0.5 * (p.detection_probability[0] + p.detection_probability[1]);
  q.detection_probability = {mean_det, mean_det};
  q.alpha = {1e-4, 1e-4};
  q.background_rate_hz = {0.0, 0.0};
  q.double_excitation = {0.0, 0.0};
  q.phase_noise_std_deg = 0.0;
  q.dephasing = {0.0, 0.0};
  q.spectral_diffusion_fwhm_mhz = 0.0;
  q.mode_overlap = 1.0;
  q.ionization = {0.0, 0.0};
  return q;
}

ErrorBudget error_budget(const LinkParameters& p) {
  p.validate();
  const LinkParameters ideal = ideal_parameters(p);
  ErrorBudget b;

  LinkParameters q = ideal;
  q.alpha = p.alpha;
  q.detection_probability = p.detection_probability;
  q.background_rate_hz = p.background_rate_hz;
  b.rows.push_back({"noise",
                    fmt_pair("alpha=%.3g/%.3g", p.alpha[0], p.alpha[1]) +
                        fmt_pair(" det=%.3g/%.3g", p.detection_probability[0], p.detection_probability[1]) +
                        fmt_pair(" bg_hz=%.3g/%.3g", p.background_rate_hz[0], p.background_rate_hz[1]),
                    infidelity(q)});

  q = ideal;
  q.double_excitation = p.double_excitation;
  b.rows.push_back({"double_excitation", fmt_pair("%.3g/%.3g", p.double_excitation[0], p.double_excitation[1]),
                    infidelity(q)});

  q = ideal;
  q.phase_noise_std_deg = p.phase_noise_std_deg;
  b.rows.push_back({"phase_noise", fmt_one("%.4g deg", p.phase_noise_std_deg), infidelity(q)});

  q = ideal;
  q.dephasing = p.dephasing;
  b.rows.push_back({"dephasing", fmt_pair("%.3g/%.3g", p.dephasing[0], p.dephasing[1]), infidelity(q)});

  q = ideal;
  q.spectral_diffusion_fwhm_mhz = p.spectral_diffusion_fwhm_mhz;
  q.mode_overlap = p.mode_overlap;
  b.rows.push_back({"spectral_diffusion",
                    fmt_pair("fwhm_mhz=%.3g overlap=%.3g", p.spectral_diffusion_fwhm_mhz, p.mode_overlap),
                    infidelity(q)});

  q = ideal;
  q.ionization = p.ionization;
  b.rows.push_back({"ionization", fmt_pair("%.3g/%.3g", p.ionization[0], p.ionization[1]), infidelity(q)});

  b.fidelity = heralded_state(p).mean_fidelity();
  b.total_infidelity = 1.0 - b.fidelity;
  return b;
}

std::vector<ScenarioResult> improvement_scenarios() {
  std::vector<ScenarioResult> out;
  for (const char* name : {"near-term", "future"}) {
    ScenarioResult r;
    r.name = name;
    r.parameters = named_parameters(name);
    r.budget = error_budget(r.parameters);
    r.fidelity = r.budget.fidelity;
    out.push_back(r);
  }
  return out;
}

}  // namespace qlink
