#include "qlink/model/link_parameters.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qlink {

namespace {

void check_probability(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string("LinkParameters: ") + name + " must be in [0, 1]");
  }
}

}  // namespace

void LinkParameters::validate() const {
  for (int j = 0; j < 2; ++j) {
    check_probability(detection_probability[j], "detection_probability");
    check_probability(alpha[j], "alpha");
    check_probability(double_excitation[j], "double_excitation");
    check_probability(dephasing[j], "dephasing");
    check_probability(ionization[j], "ionization");
    check_probability(psb_efficiency[j], "psb_efficiency");
    check_probability(ssro_fidelity[j], "ssro_fidelity");
    if (!(background_rate_hz[j] >= 0.0) || !std::isfinite(background_rate_hz[j])) {
      throw std::invalid_argument("LinkParameters: background_rate_hz must be >= 0");
    }
  }
  check_probability(mode_overlap, "mode_overlap");
  if (!(phase_noise_std_deg >= 0.0) || !std::isfinite(phase_noise_std_deg)) {
    throw std::invalid_argument("LinkParameters: phase_noise_std_deg must be >= 0");
  }
  if (!(spectral_diffusion_fwhm_mhz >= 0.0) || !std::isfinite(spectral_diffusion_fwhm_mhz)) {
    throw std::invalid_argument("LinkParameters: spectral_diffusion_fwhm_mhz must be >= 0");
  }
  if (!(window_ns > 0.0) || !std::isfinite(window_ns)) {
    throw std::invalid_argument("LinkParameters: window_ns must be > 0");
  }
  if (!(decay_time_ns > 0.0) || !std::isfinite(decay_time_ns)) {
    throw std::invalid_argument("LinkParameters: decay_time_ns must be > 0");
  }
  if (!(detection_reference_window_ns > 0.0) || !std::isfinite(detection_reference_window_ns)) {
    throw std::invalid_argument("LinkParameters: detection_reference_window_ns must be > 0");
  }
  if (!std::isfinite(rabi_angle_deg) || rabi_angle_deg <= 0.0 || rabi_angle_deg > 180.0) {
    throw std::invalid_argument("LinkParameters: rabi_angle_deg must be in (0, 180]");
  }
}

ReadoutModel LinkParameters::readout_model() const {
  return ReadoutModel::symmetric(ssro_fidelity[0], ssro_fidelity[1]);
}

LinkParameters delayed_choice_parameters() {
  LinkParameters p;
  p.detection_probability = {10.6e-6, 8.4e-6};
  p.alpha = {0.25, 0.25};
  p.background_rate_hz = {40.3, 42.8};
  p.double_excitation = {0.04, 0.1};
  p.phase_noise_std_deg = 35.0;
  p.dephasing = {0.01, 0.01};
  p.spectral_diffusion_fwhm_mhz = 13.0;
  p.mode_overlap = 0.95;
  p.window_ns = 10.0;
  p.detection_reference_window_ns = 10.0;
  p.rabi_angle_deg = 150.0;
  p.ionization = {0.035, 0.045};
  p.psb_efficiency = {0.1, 0.1};
  p.ssro_fidelity = {0.9514, 0.9449};
  return p;
}

LinkParameters heralded_parameters() {
  LinkParameters p;
  p.detection_probability = {10.0e-6, 7.1e-6};
  p.alpha = {0.25, 0.25};
  p.background_rate_hz = {23.8, 22.0};
  p.double_excitation = {0.04, 0.1};
  p.phase_noise_std_deg = 45.3;
  p.dephasing = {0.02, 0.04};
  p.spectral_diffusion_fwhm_mhz = 13.0;
  p.mode_overlap = 0.95;
  p.window_ns = 15.0;
  p.detection_reference_window_ns = 15.0;
  p.rabi_angle_deg = 150.0;
  p.ionization = {0.046, 0.046};
  p.psb_efficiency = {0.0, 0.0};
  p.ssro_fidelity = {0.9413, 0.9498};
  return p;
}

LinkParameters near_term_parameters() {
  LinkParameters p = heralded_parameters();
  p.detection_probability = {1.6e-4, 1.6e-4};
  p.alpha = {0.05, 0.05};
  p.background_rate_hz = {5.0, 5.0};
  p.double_excitation = {0.04, 0.04};
  p.phase_noise_std_deg = 15.0;
  p.dephasing = {0.02, 0.04};
  p.mode_overlap = 0.95;
  p.ionization = {0.046, 0.046};
  p.psb_efficiency = {0.1, 0.1};
  return p;
}

LinkParameters future_parameters() {
  LinkParameters p = near_term_parameters();
  p.double_excitation = {0.01, 0.01};
  p.dephasing = {0.01, 0.01};
  p.mode_overlap = 0.99;
  p.ionization = {0.01, 0.01};
  return p;
}

LinkParameters named_parameters(const std::string& name) {
  if (name == "delayed-choice") {
    return delayed_choice_parameters();
  }
  if (name == "heralded" || name == "measured") {
    return heralded_parameters();
  }
  if (name == "near-term") {
    return near_term_parameters();
  }
  if (name == "future") {
    return future_parameters();
  }
  throw std::invalid_argument("unknown parameter set: " + name);
}

}  // namespace qlink
