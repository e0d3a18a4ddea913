#pragma once

#include "qlink/quantum/two_qubit_state.h"

#include <array>
#include <cstddef>

namespace qlink {

struct NodeReadout {
  double p0_given_0 = 1.0;  // P(read 0 | bright)
  double p1_given_1 = 1.0;  // P(read 1 | dark)
};

// Ionized levels always read as dark and bypass the confusion matrix.
struct ReadoutModel {
  std::array<NodeReadout, 2> node{};

  static ReadoutModel perfect() { return {}; }
  static ReadoutModel symmetric(double f_delft, double f_hague);
  void validate() const;
};

enum class Pauli { kX, kY, kZ };

// Measurement axis on the Bloch sphere; outcome 0 is the +1 eigenvector.
struct MeasurementBasis {
  double nx = 0.0;
  double ny = 0.0;
  double nz = 1.0;

  static MeasurementBasis pauli(Pauli p);
  // cos(phi) X + sin(phi) Y.
  static MeasurementBasis equatorial(double phi_deg);
};

// Outcome order 00, 01, 10, 11 (Delft first).
using OutcomeDistribution = std::array<double, 4>;

OutcomeDistribution apply_readout(const TwoQubitState& state, const ReadoutModel& model,
                                  const MeasurementBasis& delft, const MeasurementBasis& hague);
OutcomeDistribution apply_readout(const TwoQubitState& state, const ReadoutModel& model, Pauli delft,
                                  Pauli hague);

// 4x4 response R[observed][true] on the qubit outcomes.
std::array<std::array<double, 4>, 4> readout_response(const ReadoutModel& model);

struct UnfoldOptions {
  int iterations = 50;
  double tolerance = 1e-8;
};

struct UnfoldResult {
  OutcomeDistribution distribution{};
  int iterations_used = 0;
  bool converged = false;
};

UnfoldResult unfold_readout(const OutcomeDistribution& observed, const ReadoutModel& model,
                            const UnfoldOptions& options = {});

// <AB> = p00 - p01 - p10 + p11 with binomial standard error for `shots` samples.
struct CorrelatorEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

CorrelatorEstimate correlator_from_distribution(const OutcomeDistribution& p, double shots);

}  // namespace qlink
