#include "qlink/model/single_click.h"

#include "qlink/util/cosine_fit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace qlink {

namespace {

constexpr double kFwhmToSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

// Relative detuning std in rad/ns for a FWHM in MHz.
double detuning_sigma_rad_per_ns(double fwhm_mhz) {
  return fwhm_mhz / kFwhmToSigma * 2.0 * std::numbers::pi * 1e-3;
}

template <typename F>
double simpson(F f, double a, double b, int intervals) {
  if (intervals % 2 != 0) {
    ++intervals;
  }
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) {
    s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return s * h / 3.0;
}

struct Branch {
  int level;
  double amp;
  bool photon;
  bool early;
};

std::vector<Branch> node_branches(bool ionized, double alpha, double p_exc, double p_double) {
  if (ionized) {
    return {{2, 1.0, false, false}};
  }
  return {
      {1, std::sqrt(1.0 - alpha), false, false},
      {0, std::sqrt(alpha * (1.0 - p_exc)), false, false},
      {0, std::sqrt(alpha * p_exc * (1.0 - p_double)), true, false},
      {0, std::sqrt(alpha * p_exc * p_double), true, true},
  };
}

HeraldedOutcome enumerate(const LinkParameters& p, double theta_deg, bool psb_filter) {
  p.validate();
  const double p_exc = excitation_probability(p.rabi_angle_deg);
  const std::array<double, 2> eta = collection_efficiency(p);
  const DetectionProbabilities dp = detection_probabilities(p);
  const std::array<double, 2> noise = dp.noise_per_detector;
  const double sigma_phi = deg_to_rad(p.phase_noise_std_deg);
  const double cross = p.mode_overlap *
                       spectral_diffusion_coherence(p.spectral_diffusion_fwhm_mhz, p.window_ns, p.decay_time_ns) *
                       std::exp(-0.5 * sigma_phi * sigma_phi);
  const double hom = two_photon_visibility(p);
  const Complex b_phase = std::polar(1.0, deg_to_rad(theta_deg));
  const int dim = TwoQubitState::kQutritDim;

  HeraldedOutcome out;
  out.theta_deg = theta_deg;
  double multi_event_weight = 0.0;

  for (int d = 0; d < 2; ++d) {
    const int sign = d == 0 ? 1 : -1;
    const double n_d = noise[d];
    const double n_o = noise[1 - d];
    ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
    // Environment key -> ket, split by which photon (if any) reached the detector.
    std::map<int, Eigen::VectorXcd> kets_none;
    std::map<int, Eigen::VectorXcd> kets_a;
    std::map<int, Eigen::VectorXcd> kets_b;
    auto add = [&](std::map<int, Eigen::VectorXcd>& m, int key, int idx, Complex amp) {
      auto it = m.find(key);
      if (it == m.end()) {
        it = m.emplace(key, Eigen::VectorXcd::Zero(dim)).first;
      }
      it->second(idx) += amp;
    };

    for (int ion_a = 0; ion_a < 2; ++ion_a) {
      for (int ion_b = 0; ion_b < 2; ++ion_b) {
        const double w_ion = (ion_a ? p.ionization[0] : 1.0 - p.ionization[0]) *
                             (ion_b ? p.ionization[1] : 1.0 - p.ionization[1]);
        if (w_ion <= 0.0) {
          continue;
        }
        const auto br_a = node_branches(ion_a, p.alpha[0], p_exc, p.double_excitation[0]);
        const auto br_b = node_branches(ion_b, p.alpha[1], p_exc, p.double_excitation[1]);
        for (const Branch& a : br_a) {
          for (const Branch& b : br_b) {
            for (int arr_a = 0; arr_a <= (a.photon ? 1 : 0); ++arr_a) {
              for (int arr_b = 0; arr_b <= (b.photon ? 1 : 0); ++arr_b) {
                double amp = a.amp * b.amp * std::sqrt(w_ion);
                if (a.photon) {
                  amp *= std::sqrt(arr_a ? eta[0] : 1.0 - eta[0]);
                }
                if (b.photon) {
                  amp *= std::sqrt(arr_b ? eta[1] : 1.0 - eta[1]);
                }
                const bool lost_a = a.photon && !arr_a;
                const bool lost_b = b.photon && !arr_b;
                if (psb_filter) {
                  const int uncaught_a = static_cast<int>(lost_a) + static_cast<int>(a.early);
                  const int uncaught_b = static_cast<int>(lost_b) + static_cast<int>(b.early);
                  amp *= std::sqrt(std::pow(1.0 - p.psb_efficiency[0], uncaught_a) *
                                   std::pow(1.0 - p.psb_efficiency[1], uncaught_b));
                }
                if (amp == 0.0) {
                  continue;
                }
                const int idx = TwoQubitState::index(dim, a.level, b.level);
                const int key = ion_a | (ion_b << 1) | (a.early << 2) | (b.early << 3) | (lost_a << 4) |
                                (lost_b << 5);
                const int arrivals = arr_a + arr_b;
                if (arrivals == 0) {
                  add(kets_none, key, idx, amp * std::sqrt(n_d * (1.0 - n_o)));
                } else if (arrivals == 1) {
                  const double route = std::sqrt(0.5 * (1.0 - n_o));
                  if (arr_a) {
                    add(kets_a, key, idx, amp * route);
                  } else {
                    add(kets_b, key, idx, static_cast<double>(sign) * b_phase * amp * route);
                  }
                } else {
                  const double w = amp * amp;
                  rho(idx, idx) += w * 0.25 * (1.0 + hom) * (1.0 - n_o);
                  if (d == 0) {
                    multi_event_weight += w * (n_d + n_o);
                  }
                }
              }
            }
          }
        }
      }
    }

    for (const auto& [key, v] : kets_none) {
      rho += v * v.adjoint();
    }
    for (const auto& [key, v] : kets_a) {
      rho += v * v.adjoint();
    }
    for (const auto& [key, v] : kets_b) {
      rho += v * v.adjoint();
      const auto it = kets_a.find(key);
      if (it != kets_a.end()) {
        const ComplexMatrix c = cross * (it->second * v.adjoint());
        rho += c + c.adjoint();
      }
    }

    const double prob = rho.trace().real();
    out.probability[d] = prob;
    if (prob > 0.0) {
      TwoQubitState s(rho / prob);
      s = apply_dephasing(s, Node::kDelft, p.dephasing[0]);
      s = apply_dephasing(s, Node::kHague, p.dephasing[1]);
      out.state[d] = s;
    }
  }

  out.success_probability = out.probability[0] + out.probability[1];
  if (out.success_probability > 0.0 && multi_event_weight / out.success_probability > 1e-6) {
    throw std::domain_error("heralded_state: weight of >2 click-generating events exceeds the Fock cutoff");
  }
  out.snr = dp.noise_total > 0.0 ? dp.signal_total / dp.noise_total : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

double window_signal_fraction(double window_ns, double decay_ns) {
  if (window_ns < 0.0) {
    throw std::invalid_argument("window_signal_fraction: window must be >= 0");
  }
  if (!(decay_ns > 0.0)) {
    throw std::invalid_argument("window_signal_fraction: decay must be > 0");
  }
  return -std::expm1(-window_ns / decay_ns);
}

double excitation_probability(double rabi_angle_deg) {
  const double s = std::sin(deg_to_rad(rabi_angle_deg) / 2.0);
  return s * s;
}

std::array<double, 2> collection_efficiency(const LinkParameters& p) {
  const double p_exc = excitation_probability(p.rabi_angle_deg);
  const double scale = window_signal_fraction(p.window_ns, p.decay_time_ns) /
                       window_signal_fraction(p.detection_reference_window_ns, p.decay_time_ns);
  std::array<double, 2> eta{};
  for (int j = 0; j < 2; ++j) {
    eta[j] = p.detection_probability[j] / p_exc * scale;
    if (eta[j] > 1.0) {
      throw std::invalid_argument("collection efficiency exceeds 1 for the requested window");
    }
  }
  return eta;
}

DetectionProbabilities detection_probabilities(const LinkParameters& p) {
  p.validate();
  const double scale = window_signal_fraction(p.window_ns, p.decay_time_ns) /
                       window_signal_fraction(p.detection_reference_window_ns, p.decay_time_ns);
  DetectionProbabilities d;
  for (int j = 0; j < 2; ++j) {
    d.signal_per_node[j] = p.alpha[j] * p.detection_probability[j] * scale;
    d.noise_per_detector[j] = std::min(1.0, p.background_rate_hz[j] * p.window_ns * 1e-9);
  }
  d.signal_total = d.signal_per_node[0] + d.signal_per_node[1];
  d.noise_total = d.noise_per_detector[0] + d.noise_per_detector[1];
  // Independent photons, balanced splitter, no interference, threshold detectors.
  const double none_to_one = (1.0 - 0.5 * d.signal_per_node[0]) * (1.0 - 0.5 * d.signal_per_node[1]);
  const double none_at_all = (1.0 - d.signal_per_node[0]) * (1.0 - d.signal_per_node[1]);
  for (int k = 0; k < 2; ++k) {
    const double n_k = d.noise_per_detector[k];
    const double n_o = d.noise_per_detector[1 - k];
    d.click_per_detector[k] = (1.0 - n_o) * (none_to_one - (1.0 - n_k) * none_at_all);
  }
  d.success_probability = d.click_per_detector[0] + d.click_per_detector[1];
  return d;
}

double snr(const LinkParameters& p) {
  const DetectionProbabilities d = detection_probabilities(p);
  if (d.noise_total <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return d.signal_total / d.noise_total;
}

double spectral_diffusion_coherence(double fwhm_mhz, double window_ns, double decay_ns) {
  const double s = detuning_sigma_rad_per_ns(fwhm_mhz);
  if (s == 0.0 || window_ns <= 0.0) {
    return 1.0;
  }
  const auto weight = [&](double t) { return std::exp(-t / decay_ns); };
  const double num = simpson([&](double t) { return weight(t) * std::exp(-0.5 * s * s * t * t); }, 0.0,
                             window_ns, 2000);
  const double den = decay_ns * window_signal_fraction(window_ns, decay_ns);
  return num / den;
}

double two_photon_visibility(const LinkParameters& p) {
  const double s = detuning_sigma_rad_per_ns(p.spectral_diffusion_fwhm_mhz);
  const double v0 = p.mode_overlap * p.mode_overlap;
  if (s == 0.0) {
    return v0;
  }
  const double tau = p.decay_time_ns;
  const double avg = simpson(
      [&](double x) {
        const double delta = x * s;
        return std::exp(-0.5 * x * x) / (1.0 + delta * delta * tau * tau);
      },
      -10.0, 10.0, 4000);
  return v0 * avg / std::sqrt(2.0 * std::numbers::pi);
}

double HeraldedOutcome::fidelity(int detector) const {
  return bell_fidelity(state.at(detector - 1), heralded_sign(detector), theta_deg);
}

double HeraldedOutcome::mean_fidelity() const { return 0.5 * (fidelity(1) + fidelity(2)); }

HeraldedOutcome heralded_state(const LinkParameters& p, double theta_deg) {
  return enumerate(p, theta_deg, false);
}

HeraldedOutcome psb_false_herald_filter(const LinkParameters& p, double theta_deg) {
  return enumerate(p, theta_deg, true);
}

std::vector<WindowSweepPoint> window_sweep(const LinkParameters& p, const std::vector<double>& windows_ns,
                                           double attempt_rate_hz) {
  if (!(attempt_rate_hz > 0.0)) {
    throw std::invalid_argument("window_sweep: attempt rate must be > 0");
  }
  std::vector<WindowSweepPoint> out;
  out.reserve(windows_ns.size());
  double prev = 0.0;
  for (const double w : windows_ns) {
    if (!(w > 0.0)) {
      throw std::invalid_argument("window_sweep: windows must be positive");
    }
    if (w < prev) {
      throw std::invalid_argument("window_sweep: windows must be sorted");
    }
    prev = w;
    LinkParameters q = p;
    q.window_ns = w;
    const HeraldedOutcome h = heralded_state(q);
    WindowSweepPoint pt;
    pt.window_ns = w;
    pt.fidelity = h.mean_fidelity();
    pt.success_probability = h.success_probability;
    pt.rate_hz = h.success_probability * attempt_rate_hz;
    pt.snr = h.snr;
    out.push_back(pt);
  }
  return out;
}

}  // namespace qlink
