#pragma once

#include <Eigen/Dense>

#include <complex>

namespace qlink {

// Per-node level. Node order is (Delft, The Hague); Delft is the first tensor factor.
enum class Level : int { kBright = 0, kDark = 1, kIonized = 2 };

enum class Node : int { kDelft = 0, kHague = 1 };

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

// Density matrix over the two communication qubits. Dimension 4 (qubits) or 9
// (each node carries an extra ionized level). Basis order: |00>,|01>,|10>,|11>,
// then |0i>,|1i>,|i0>,|i1>,|ii>.
class TwoQubitState {
 public:
  static constexpr int kQubitDim = 4;
  static constexpr int kQutritDim = 9;

  TwoQubitState();
  explicit TwoQubitState(ComplexMatrix matrix);

  static TwoQubitState maximally_mixed(int dim = kQubitDim);
  static TwoQubitState product(Level a, Level b);

  // Index of |a b> in a basis of the given dimension. Ionized levels need dim 9.
  static int index(int dim, int a, int b);
  static int index(int dim, Level a, Level b) {
    return index(dim, static_cast<int>(a), static_cast<int>(b));
  }
  static int levels_per_node(int dim) { return dim == kQutritDim ? 3 : 2; }

  int dim() const { return static_cast<int>(matrix_.rows()); }
  bool has_ionized_levels() const { return dim() == kQutritDim; }
  const ComplexMatrix& matrix() const { return matrix_; }

  Complex element(Level a1, Level b1, Level a2, Level b2) const;
  double population(Level a, Level b) const;
  double trace() const;

  bool is_valid(double tol = 1e-9) const;
  // Throws InvariantError with a description if invalid.
  void validate(double tol = 1e-9) const;

  TwoQubitState extended() const;

  // Applies op_delft (x) op_hague, each of size levels_per_node(dim).
  TwoQubitState conjugated(const ComplexMatrix& op_delft, const ComplexMatrix& op_hague) const;

 private:
  ComplexMatrix matrix_;
};

// Operator on the full space built from per-node operators.
ComplexMatrix two_node_operator(const ComplexMatrix& op_delft, const ComplexMatrix& op_hague, int dim);

struct CorrelatorTriple {
  double zz = 0.0;
  double xx = 0.0;
  double yy = 0.0;
};

// (|01> + sign e^{i theta}|10>)/sqrt 2, theta in degrees.
TwoQubitState bell_state(int sign, double theta_deg);

CorrelatorTriple correlators(const TwoQubitState& state);

double fidelity_from_correlators(const CorrelatorTriple& c, int sign);

// Rotates node's |1> level by exp(-i angle) (relative to |0>).
TwoQubitState rotate_phase(const TwoQubitState& state, Node node, double angle_deg);

// Fidelity to the Bell state of the given sign and phase, via correlators after
// removing the phase; ionized levels score as dark.
double bell_fidelity(const TwoQubitState& state, int sign, double theta_deg = 0.0);

// Detector 1 heralds Psi+, detector 2 heralds Psi-. Detector 1 gets a Z on Delft.
int heralded_sign(int detector);
TwoQubitState apply_detector_feedforward(const TwoQubitState& state, int detector);

// Per-node phase-flip channel: coherences between |0> and |1> of that node scaled by (1 - p).
TwoQubitState apply_dephasing(const TwoQubitState& state, Node node, double p);

}  // namespace qlink
