#include "qlink/model/single_click.h"

#include "qlink/util/cosine_fit.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qlink {

namespace {

struct Component {
  int level;
  double amp;
  bool photon;
};

// Conditional node state for one sampled emission record. Sector 0 has no lost
// photon, sector 1 lost its window photon; the two are orthogonal in the environment.
struct NodeSample {
  Component comp[2][3];
  int count[2] = {0, 0};
  bool discarded = false;
};

NodeSample sample_node(bool ionized, double alpha, double p_exc, double p_double, double eta, double psb,
                       bool psb_filter, Rng& rng) {
  NodeSample s;
  if (ionized) {
    s.comp[0][s.count[0]++] = {2, 1.0, false};
    return s;
  }
  const double p_early = alpha * p_exc * p_double;
  const double lost_weight = psb_filter ? 1.0 - psb : 1.0;
  if (rng.bernoulli(p_early)) {
    s.comp[0][s.count[0]++] = {0, std::sqrt(eta), true};
    s.comp[1][s.count[1]++] = {0, std::sqrt((1.0 - eta) * lost_weight), false};
    if (psb_filter && rng.bernoulli(psb)) {
      s.discarded = true;  // early photon seen on the PSB
    }
    return s;
  }
  const double norm = std::sqrt(1.0 - p_early);
  s.comp[0][s.count[0]++] = {1, std::sqrt(1.0 - alpha) / norm, false};
  s.comp[0][s.count[0]++] = {0, std::sqrt(alpha * (1.0 - p_exc)) / norm, false};
  s.comp[0][s.count[0]++] = {0, std::sqrt(alpha * p_exc * (1.0 - p_double) * eta) / norm, true};
  s.comp[1][s.count[1]++] = {0, std::sqrt(alpha * p_exc * (1.0 - p_double) * (1.0 - eta) * lost_weight) / norm,
                             false};
  return s;
}

double sample_click_time(double window_ns, double tau, Rng& rng) {
  const double u = rng.uniform();
  return -tau * std::log1p(-u * (-std::expm1(-window_ns / tau)));
}

}  // namespace

MonteCarloEstimate monte_carlo_heralded(const LinkParameters& p, double theta_deg, Rng& rng,
                                        const MonteCarloOptions& options) {
  p.validate();
  if (options.samples == 0 || options.batches < 2) {
    throw std::invalid_argument("monte_carlo_heralded: need samples > 0 and >= 2 batches");
  }
  const int dim = TwoQubitState::kQutritDim;
  const double p_exc = excitation_probability(p.rabi_angle_deg);
  const std::array<double, 2> eta = collection_efficiency(p);
  const DetectionProbabilities dp = detection_probabilities(p);
  const double sigma_phi = deg_to_rad(p.phase_noise_std_deg);
  const double sigma_delta = p.spectral_diffusion_fwhm_mhz / 2.3548200450309493 * 2.0 * std::numbers::pi * 1e-3;
  const double tau = p.decay_time_ns;
  const double bs = p.mode_overlap;
  const Complex theta_phase = std::polar(1.0, deg_to_rad(theta_deg));

  const std::uint64_t per_batch = (options.samples + options.batches - 1) / options.batches;
  std::array<ComplexMatrix, 2> total{ComplexMatrix::Zero(dim, dim), ComplexMatrix::Zero(dim, dim)};
  std::array<std::vector<double>, 2> batch_fid;
  std::array<std::vector<double>, 2> batch_prob;
  std::uint64_t done = 0;

  for (int batch = 0; batch < options.batches && done < options.samples; ++batch) {
    std::array<ComplexMatrix, 2> acc{ComplexMatrix::Zero(dim, dim), ComplexMatrix::Zero(dim, dim)};
    std::uint64_t n_batch = 0;
    for (; n_batch < per_batch && done < options.samples; ++n_batch, ++done) {
      const bool ion_a = rng.bernoulli(p.ionization[0]);
      const bool ion_b = rng.bernoulli(p.ionization[1]);
      const NodeSample a = sample_node(ion_a, p.alpha[0], p_exc, p.double_excitation[0], eta[0],
                                       p.psb_efficiency[0], options.apply_psb_filter, rng);
      const NodeSample b = sample_node(ion_b, p.alpha[1], p_exc, p.double_excitation[1], eta[1],
                                       p.psb_efficiency[1], options.apply_psb_filter, rng);
      const double phi = rng.normal(0.0, sigma_phi);
      const double delta = rng.normal(0.0, sigma_delta);
      const double t_click = sample_click_time(p.window_ns, tau, rng);
      const bool flip_a = rng.bernoulli(0.5 * p.dephasing[0]);
      const bool flip_b = rng.bernoulli(0.5 * p.dephasing[1]);
      if (a.discarded || b.discarded) {
        continue;
      }
      const Complex b_mode = std::polar(1.0, phi + delta * t_click);
      const double hom = bs * bs / (1.0 + delta * delta * tau * tau);

      for (int d = 0; d < 2; ++d) {
        const double sign = d == 0 ? 1.0 : -1.0;
        const double n_d = dp.noise_per_detector[d];
        const double n_o = dp.noise_per_detector[1 - d];
        const double route = std::sqrt(0.5 * (1.0 - n_o));
        ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
        for (int sa = 0; sa < 2; ++sa) {
          for (int sb = 0; sb < 2; ++sb) {
            Eigen::VectorXcd v_noise = Eigen::VectorXcd::Zero(dim);
            Eigen::VectorXcd v_shared = Eigen::VectorXcd::Zero(dim);
            Eigen::VectorXcd v_private = Eigen::VectorXcd::Zero(dim);
            for (int i = 0; i < a.count[sa]; ++i) {
              for (int j = 0; j < b.count[sb]; ++j) {
                const Component& ca = a.comp[sa][i];
                const Component& cb = b.comp[sb][j];
                const int idx = TwoQubitState::index(dim, ca.level, cb.level);
                Complex amp = ca.amp * cb.amp;
                if (flip_a && ca.level == 1) {
                  amp = -amp;
                }
                if (flip_b && cb.level == 1) {
                  amp = -amp;
                }
                if (!ca.photon && !cb.photon) {
                  v_noise(idx) += amp * std::sqrt(n_d * (1.0 - n_o));
                } else if (ca.photon && !cb.photon) {
                  v_shared(idx) += amp * route;
                } else if (!ca.photon && cb.photon) {
                  // B's photon mode: overlap bs with A's mode, remainder orthogonal.
                  const Complex amp_b = amp * route * sign * theta_phase * b_mode;
                  v_shared(idx) += bs * amp_b;
                  v_private(idx) += std::sqrt(1.0 - bs * bs) * amp_b;
                } else {
                  rho(idx, idx) += std::norm(amp) * 0.25 * (1.0 + hom) * (1.0 - n_o);
                }
              }
            }
            rho += v_noise * v_noise.adjoint() + v_shared * v_shared.adjoint() +
                   v_private * v_private.adjoint();
          }
        }
        acc[d] += rho;
      }
    }
    for (int d = 0; d < 2; ++d) {
      total[d] += acc[d];
      const double prob = acc[d].trace().real() / static_cast<double>(n_batch);
      batch_prob[d].push_back(prob);
      if (prob > 0.0) {
        const TwoQubitState s(acc[d] / acc[d].trace().real());
        batch_fid[d].push_back(bell_fidelity(s, d == 0 ? 1 : -1, theta_deg));
      }
    }
  }

  MonteCarloEstimate est;
  est.samples = done;
  est.outcome.theta_deg = theta_deg;
  for (int d = 0; d < 2; ++d) {
    const double prob = total[d].trace().real() / static_cast<double>(done);
    est.outcome.probability[d] = prob;
    if (prob > 0.0) {
      est.outcome.state[d] = TwoQubitState(total[d] / total[d].trace().real());
    }
    est.fidelity[d] = prob > 0.0 ? est.outcome.fidelity(d + 1) : 0.0;
    auto stderr_of = [](const std::vector<double>& xs) {
      if (xs.size() < 2) {
        return 0.0;
      }
      double m = 0.0;
      for (const double x : xs) {
        m += x;
      }
      m /= static_cast<double>(xs.size());
      double v = 0.0;
      for (const double x : xs) {
        v += (x - m) * (x - m);
      }
      v /= static_cast<double>(xs.size() - 1);
      return std::sqrt(v / static_cast<double>(xs.size()));
    };
    est.fidelity_err[d] = stderr_of(batch_fid[d]);
    est.probability_err[d] = stderr_of(batch_prob[d]);
  }
  est.outcome.success_probability = est.outcome.probability[0] + est.outcome.probability[1];
  est.outcome.snr =
      dp.noise_total > 0.0 ? dp.signal_total / dp.noise_total : std::numeric_limits<double>::infinity();
  return est;
}

}  // namespace qlink
