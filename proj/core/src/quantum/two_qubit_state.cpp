#include "qlink/quantum/two_qubit_state.h"

#include "qlink/util/cosine_fit.h"
#include "qlink/util/errors.h"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qlink {

namespace {

constexpr std::array<std::array<int, 3>, 3> kQutritIndex = {{
    {0, 1, 4},
    {2, 3, 5},
    {6, 7, 8},
}};

ComplexMatrix pauli(int levels, char which) {
  ComplexMatrix m = ComplexMatrix::Zero(levels, levels);
  switch (which) {
    case 'z':
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      if (levels == 3) {
        m(2, 2) = -1.0;  // ionized reads as dark
      }
      break;
    case 'x':
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case 'y':
      m(0, 1) = Complex(0.0, -1.0);
      m(1, 0) = Complex(0.0, 1.0);
      break;
    default:
      throw std::invalid_argument("pauli: unknown axis");
  }
  return m;
}

double expectation(const TwoQubitState& s, const ComplexMatrix& op) {
  return (s.matrix() * op).trace().real();
}

}  // namespace

TwoQubitState::TwoQubitState() : matrix_(ComplexMatrix::Zero(kQubitDim, kQubitDim)) {
  matrix_(0, 0) = 1.0;
}

TwoQubitState::TwoQubitState(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() ||
      (matrix_.rows() != kQubitDim && matrix_.rows() != kQutritDim)) {
    throw std::invalid_argument("TwoQubitState: matrix must be 4x4 or 9x9");
  }
}

TwoQubitState TwoQubitState::maximally_mixed(int dim) {
  if (dim != kQubitDim && dim != kQutritDim) {
    throw std::invalid_argument("maximally_mixed: dim must be 4 or 9");
  }
  ComplexMatrix m = ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim);
  return TwoQubitState(m);
}

TwoQubitState TwoQubitState::product(Level a, Level b) {
  const int dim = (a == Level::kIonized || b == Level::kIonized) ? kQutritDim : kQubitDim;
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  const int i = index(dim, a, b);
  m(i, i) = 1.0;
  return TwoQubitState(m);
}

int TwoQubitState::index(int dim, int a, int b) {
  if (dim == kQubitDim) {
    if (a < 0 || a > 1 || b < 0 || b > 1) {
      throw std::out_of_range("TwoQubitState::index: level out of range for dim 4");
    }
    return 2 * a + b;
  }
  if (dim == kQutritDim) {
    if (a < 0 || a > 2 || b < 0 || b > 2) {
      throw std::out_of_range("TwoQubitState::index: level out of range for dim 9");
    }
    return kQutritIndex[a][b];
  }
  throw std::invalid_argument("TwoQubitState::index: dim must be 4 or 9");
}

Complex TwoQubitState::element(Level a1, Level b1, Level a2, Level b2) const {
  return matrix_(index(dim(), a1, b1), index(dim(), a2, b2));
}

double TwoQubitState::population(Level a, Level b) const {
  if (!has_ionized_levels() && (a == Level::kIonized || b == Level::kIonized)) {
    return 0.0;
  }
  return element(a, b, a, b).real();
}

double TwoQubitState::trace() const { return matrix_.trace().real(); }

bool TwoQubitState::is_valid(double tol) const {
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > tol) {
    return false;
  }
  if (std::abs(matrix_.trace() - Complex(1.0, 0.0)) > tol) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (matrix_ + matrix_.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

void TwoQubitState::validate(double tol) const {
  const double herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  const double tr_err = std::abs(matrix_.trace() - Complex(1.0, 0.0));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (matrix_ + matrix_.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (herm > tol || tr_err > tol || min_eig < -tol) {
    std::ostringstream os;
    os << "invalid density matrix: hermiticity error " << herm << ", trace error " << tr_err
       << ", min eigenvalue " << min_eig;
    throw InvariantError(os.str());
  }
}

TwoQubitState TwoQubitState::extended() const {
  if (has_ionized_levels()) {
    return *this;
  }
  ComplexMatrix m = ComplexMatrix::Zero(kQutritDim, kQutritDim);
  m.topLeftCorner(kQubitDim, kQubitDim) = matrix_;
  return TwoQubitState(m);
}

ComplexMatrix two_node_operator(const ComplexMatrix& op_delft, const ComplexMatrix& op_hague, int dim) {
  const int n = TwoQubitState::levels_per_node(dim);
  if (op_delft.rows() != n || op_delft.cols() != n || op_hague.rows() != n || op_hague.cols() != n) {
    throw std::invalid_argument("two_node_operator: per-node operator size mismatch");
  }
  ComplexMatrix full = ComplexMatrix::Zero(dim, dim);
  for (int a1 = 0; a1 < n; ++a1) {
    for (int b1 = 0; b1 < n; ++b1) {
      const int row = TwoQubitState::index(dim, a1, b1);
      for (int a2 = 0; a2 < n; ++a2) {
        for (int b2 = 0; b2 < n; ++b2) {
          full(row, TwoQubitState::index(dim, a2, b2)) = op_delft(a1, a2) * op_hague(b1, b2);
        }
      }
    }
  }
  return full;
}

TwoQubitState TwoQubitState::conjugated(const ComplexMatrix& op_delft, const ComplexMatrix& op_hague) const {
  const ComplexMatrix u = two_node_operator(op_delft, op_hague, dim());
  return TwoQubitState(u * matrix_ * u.adjoint());
}

TwoQubitState bell_state(int sign, double theta_deg) {
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("bell_state: sign must be +1 or -1");
  }
  if (!std::isfinite(theta_deg)) {
    throw std::invalid_argument("bell_state: theta must be finite");
  }
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
  const double theta = deg_to_rad(theta_deg);
  psi(1) = 1.0 / std::sqrt(2.0);
  psi(2) = static_cast<double>(sign) * std::polar(1.0, theta) / std::sqrt(2.0);
  return TwoQubitState(psi * psi.adjoint());
}

CorrelatorTriple correlators(const TwoQubitState& state) {
  const int dim = state.dim();
  const int n = TwoQubitState::levels_per_node(dim);
  CorrelatorTriple c;
  c.zz = expectation(state, two_node_operator(pauli(n, 'z'), pauli(n, 'z'), dim));
  c.xx = expectation(state, two_node_operator(pauli(n, 'x'), pauli(n, 'x'), dim));
  c.yy = expectation(state, two_node_operator(pauli(n, 'y'), pauli(n, 'y'), dim));
  return c;
}

double fidelity_from_correlators(const CorrelatorTriple& c, int sign) {
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("fidelity_from_correlators: sign must be +1 or -1");
  }
  return 0.25 * (1.0 - c.zz + sign * c.xx + sign * c.yy);
}

TwoQubitState rotate_phase(const TwoQubitState& state, Node node, double angle_deg) {
  const int n = TwoQubitState::levels_per_node(state.dim());
  ComplexMatrix rot = ComplexMatrix::Identity(n, n);
  rot(1, 1) = std::polar(1.0, -deg_to_rad(angle_deg));
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  return node == Node::kDelft ? state.conjugated(rot, id) : state.conjugated(id, rot);
}

double bell_fidelity(const TwoQubitState& state, int sign, double theta_deg) {
  // |10> carries the phase: undo it on Delft's |1> level.
  const TwoQubitState aligned = theta_deg == 0.0 ? state : rotate_phase(state, Node::kDelft, theta_deg);
  return fidelity_from_correlators(correlators(aligned), sign);
}

int heralded_sign(int detector) {
  if (detector == 1) {
    return 1;
  }
  if (detector == 2) {
    return -1;
  }
  throw std::invalid_argument("detector must be 1 or 2");
}

TwoQubitState apply_detector_feedforward(const TwoQubitState& state, int detector) {
  if (heralded_sign(detector) == -1) {
    return state;
  }
  const int n = TwoQubitState::levels_per_node(state.dim());
  ComplexMatrix z = ComplexMatrix::Identity(n, n);
  z(1, 1) = -1.0;
  return state.conjugated(z, ComplexMatrix::Identity(n, n));
}

TwoQubitState apply_dephasing(const TwoQubitState& state, Node node, double p) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("apply_dephasing: p must be in [0, 1]");
  }
  const int dim = state.dim();
  const int n = TwoQubitState::levels_per_node(dim);
  ComplexMatrix m = state.matrix();
  for (int a1 = 0; a1 < n; ++a1) {
    for (int b1 = 0; b1 < n; ++b1) {
      for (int a2 = 0; a2 < n; ++a2) {
        for (int b2 = 0; b2 < n; ++b2) {
          const int l1 = node == Node::kDelft ? a1 : b1;
          const int l2 = node == Node::kDelft ? a2 : b2;
          if (l1 < 2 && l2 < 2 && l1 != l2) {
            m(TwoQubitState::index(dim, a1, b1), TwoQubitState::index(dim, a2, b2)) *= (1.0 - p);
          }
        }
      }
    }
  }
  return TwoQubitState(m);
}

}  // namespace qlink
