#include "qlink/quantum/readout.h"

#include "qlink/util/cosine_fit.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qlink {

namespace {

// Projector onto the +/- eigenvector of n.sigma, embedded in the node's level space.
ComplexMatrix projector(const MeasurementBasis& b, int outcome, int levels) {
  const double s = outcome == 0 ? 1.0 : -1.0;
  ComplexMatrix p = ComplexMatrix::Zero(levels, levels);
  p(0, 0) = 0.5 * (1.0 + s * b.nz);
  p(1, 1) = 0.5 * (1.0 - s * b.nz);
  p(0, 1) = 0.5 * s * Complex(b.nx, -b.ny);
  p(1, 0) = 0.5 * s * Complex(b.nx, b.ny);
  return p;
}

ComplexMatrix ionized_projector(int levels) {
  ComplexMatrix p = ComplexMatrix::Zero(levels, levels);
  if (levels == 3) {
    p(2, 2) = 1.0;
  }
  return p;
}

}  // namespace

ReadoutModel ReadoutModel::symmetric(double f_delft, double f_hague) {
  ReadoutModel m;
  m.node[0] = {f_delft, f_delft};
  m.node[1] = {f_hague, f_hague};
  m.validate();
  return m;
}

void ReadoutModel::validate() const {
  for (const auto& n : node) {
    if (!(n.p0_given_0 >= 0.0 && n.p0_given_0 <= 1.0 && n.p1_given_1 >= 0.0 && n.p1_given_1 <= 1.0)) {
      throw std::invalid_argument("ReadoutModel: assignment probabilities must be in [0, 1]");
    }
  }
}

MeasurementBasis MeasurementBasis::pauli(Pauli p) {
  switch (p) {
    case Pauli::kX:
      return {1.0, 0.0, 0.0};
    case Pauli::kY:
      return {0.0, 1.0, 0.0};
    case Pauli::kZ:
      return {0.0, 0.0, 1.0};
  }
  return {};
}

MeasurementBasis MeasurementBasis::equatorial(double phi_deg) {
  const double phi = deg_to_rad(phi_deg);
  return {std::cos(phi), std::sin(phi), 0.0};
}

OutcomeDistribution apply_readout(const TwoQubitState& state, const ReadoutModel& model,
                                  const MeasurementBasis& delft, const MeasurementBasis& hague) {
  model.validate();
  const int dim = state.dim();
  const int n = TwoQubitState::levels_per_node(dim);
  // Physical outcomes per node: 0 = bright, 1 = dark, 2 = ionized.
  std::array<std::array<ComplexMatrix, 3>, 2> proj;
  for (int k = 0; k < 2; ++k) {
    const MeasurementBasis& b = k == 0 ? delft : hague;
    proj[k][0] = projector(b, 0, n);
    proj[k][1] = projector(b, 1, n);
    proj[k][2] = ionized_projector(n);
  }
  std::array<std::array<double, 3>, 3> truth{};
  for (int ta = 0; ta < 3; ++ta) {
    for (int tb = 0; tb < 3; ++tb) {
      if ((ta == 2 || tb == 2) && n == 2) {
        continue;
      }
      const ComplexMatrix op = two_node_operator(proj[0][ta], proj[1][tb], dim);
      truth[ta][tb] = std::max(0.0, (state.matrix() * op).trace().real());
    }
  }
  auto read = [&](int node, int r, int t) {
    const NodeReadout& nr = model.node[node];
    if (t == 2) {
      return r == 1 ? 1.0 : 0.0;
    }
    if (t == 0) {
      return r == 0 ? nr.p0_given_0 : 1.0 - nr.p0_given_0;
    }
    return r == 1 ? nr.p1_given_1 : 1.0 - nr.p1_given_1;
  };
  OutcomeDistribution out{};
  for (int ra = 0; ra < 2; ++ra) {
    for (int rb = 0; rb < 2; ++rb) {
      double p = 0.0;
      for (int ta = 0; ta < 3; ++ta) {
        for (int tb = 0; tb < 3; ++tb) {
          p += read(0, ra, ta) * read(1, rb, tb) * truth[ta][tb];
        }
      }
      out[2 * ra + rb] = p;
    }
  }
  return out;
}

OutcomeDistribution apply_readout(const TwoQubitState& state, const ReadoutModel& model, Pauli delft,
                                  Pauli hague) {
  return apply_readout(state, model, MeasurementBasis::pauli(delft), MeasurementBasis::pauli(hague));
}

std::array<std::array<double, 4>, 4> readout_response(const ReadoutModel& model) {
  model.validate();
  auto c = [&](int node, int r, int t) {
    const NodeReadout& nr = model.node[node];
    if (t == 0) {
      return r == 0 ? nr.p0_given_0 : 1.0 - nr.p0_given_0;
    }
    return r == 1 ? nr.p1_given_1 : 1.0 - nr.p1_given_1;
  };
  std::array<std::array<double, 4>, 4> resp{};
  for (int o = 0; o < 4; ++o) {
    for (int t = 0; t < 4; ++t) {
      resp[o][t] = c(0, o / 2, t / 2) * c(1, o % 2, t % 2);
    }
  }
  return resp;
}

UnfoldResult unfold_readout(const OutcomeDistribution& observed, const ReadoutModel& model,
                            const UnfoldOptions& options) {
  if (options.iterations < 1) {
    throw std::invalid_argument("unfold_readout: iterations must be >= 1");
  }
  double total = 0.0;
  for (const double v : observed) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw std::invalid_argument("unfold_readout: histogram must be non-negative");
    }
    total += v;
  }
  if (total <= 0.0) {
    throw std::invalid_argument("unfold_readout: histogram is all zero");
  }
  OutcomeDistribution obs{};
  for (int i = 0; i < 4; ++i) {
    obs[i] = observed[i] / total;
  }
  const auto resp = readout_response(model);

  UnfoldResult result;
  OutcomeDistribution prior = {0.25, 0.25, 0.25, 0.25};
  for (int it = 0; it < options.iterations; ++it) {
    OutcomeDistribution next{};
    for (int o = 0; o < 4; ++o) {
      if (obs[o] == 0.0) {
        continue;
      }
      double norm = 0.0;
      for (int t = 0; t < 4; ++t) {
        norm += resp[o][t] * prior[t];
      }
      if (norm <= 0.0) {
        continue;
      }
      for (int t = 0; t < 4; ++t) {
        next[t] += obs[o] * resp[o][t] * prior[t] / norm;
      }
    }
    double eff_sum = 0.0;
    for (int t = 0; t < 4; ++t) {
      double eff = 0.0;
      for (int o = 0; o < 4; ++o) {
        eff += resp[o][t];
      }
      next[t] = eff > 0.0 ? next[t] / eff : 0.0;
      eff_sum += next[t];
    }
    double delta = 0.0;
    for (int t = 0; t < 4; ++t) {
      next[t] /= eff_sum;
      delta += (next[t] - prior[t]) * (next[t] - prior[t]);
    }
    prior = next;
    result.iterations_used = it + 1;
    if (std::sqrt(delta) < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.distribution = prior;
  return result;
}

CorrelatorEstimate correlator_from_distribution(const OutcomeDistribution& p, double shots) {
  const double total = p[0] + p[1] + p[2] + p[3];
  CorrelatorEstimate e;
  if (total <= 0.0) {
    return e;
  }
  e.value = (p[0] - p[1] - p[2] + p[3]) / total;
  if (shots > 0.0) {
    e.std_error = std::sqrt(std::max(0.0, 1.0 - e.value * e.value) / shots);
  }
  return e;
}

}  // namespace qlink
