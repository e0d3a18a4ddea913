#include "qlink/util/cosine_fit.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qlink {

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) {
    w += 360.0;
  }
  if (w >= 360.0) {
    w -= 360.0;
  }
  return w;
}

CosineFit fit_cosine(const std::vector<double>& x_deg, const std::vector<double>& y,
                     const std::vector<double>& sigma) {
  const std::size_t n = x_deg.size();
  if (n != y.size() || (!sigma.empty() && sigma.size() != n)) {
    throw std::invalid_argument("fit_cosine: size mismatch");
  }
  if (n < 3) {
    throw std::invalid_argument("fit_cosine: need at least 3 points");
  }
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sigma.empty() || sigma[i] <= 0.0 ? 1.0 : 1.0 / sigma[i];
    const double x = deg_to_rad(x_deg[i]);
    a(i, 0) = w * std::cos(x);
    a(i, 1) = w * std::sin(x);
    a(i, 2) = w;
    b(i) = w * y[i];
  }
  const Eigen::Matrix3d normal = a.transpose() * a;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
  if (lu.rank() < 3) {
    throw std::invalid_argument("fit_cosine: angles do not determine a cosine");
  }
  const Eigen::Vector3d coef = lu.solve(a.transpose() * b);
  const Eigen::VectorXd resid = b - a * coef;

  CosineFit fit;
  const double c = coef(0);
  const double s = coef(1);
  fit.amplitude = std::hypot(c, s);
  fit.phase_deg = wrap_degrees(rad_to_deg(std::atan2(s, c)));
  fit.offset = coef(2);

  const double dof = n > 3 ? static_cast<double>(n - 3) : 1.0;
  const double chi2 = resid.squaredNorm();
  // With known sigmas the covariance is (A^T A)^-1; otherwise scale by the residual variance.
  const double scale = sigma.empty() ? chi2 / dof : 1.0;
  fit.residual_std = std::sqrt(chi2 / dof);
  const Eigen::Matrix3d cov = lu.inverse() * scale;
  if (fit.amplitude > 0.0) {
    const double dc = c / fit.amplitude;
    const double ds = s / fit.amplitude;
    const double var_amp = dc * dc * cov(0, 0) + ds * ds * cov(1, 1) + 2.0 * dc * ds * cov(0, 1);
    const double var_phase = (ds * ds * cov(0, 0) + dc * dc * cov(1, 1) - 2.0 * dc * ds * cov(0, 1)) /
                             (fit.amplitude * fit.amplitude);
    fit.amplitude_err = std::sqrt(std::max(0.0, var_amp));
    fit.phase_err_deg = rad_to_deg(std::sqrt(std::max(0.0, var_phase)));
  } else {
    fit.phase_err_deg = 180.0;
  }
  return fit;
}

}  // namespace qlink
