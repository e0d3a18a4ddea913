#include "qlink/model/single_click.h"

#include <gtest/gtest.h>

#include <set>

namespace qlink {
namespace {

TEST(ErrorBudget, RowsAndTotals) {
  const ErrorBudget b = error_budget(heralded_parameters());
  std::set<std::string> names;
  for (const BudgetRow& r : b.rows) {
    names.insert(r.parameter);
    EXPECT_GE(r.infidelity, 0.0) << r.parameter;
    EXPECT_LT(r.infidelity, 0.5) << r.parameter;
    EXPECT_FALSE(r.value.empty());
  }
  EXPECT_EQ(names, (std::set<std::string>{"noise", "double_excitation", "phase_noise", "dephasing",
                                          "spectral_diffusion", "ionization"}));
  EXPECT_NEAR(b.total_infidelity, 1.0 - b.fidelity, 1e-12);
  EXPECT_NEAR(b.fidelity, heralded_state(heralded_parameters()).mean_fidelity(), 1e-12);
}

TEST(ErrorBudget, IdealReferenceIsNearPerfect) {
  const LinkParameters ideal = ideal_parameters(heralded_parameters());
  EXPECT_GT(heralded_state(ideal).mean_fidelity(), 0.999);
}

// Single-parameter phase row: the only error is exp(-sigma^2/2) on the coherence,
// so the fidelity is (1 + exp(-sigma^2/2)) / 2 up to the tiny alpha of the reference.
TEST(ErrorBudget, PhaseRowMatchesAnalyticForm) {
  const LinkParameters p = heralded_parameters();
  const ErrorBudget b = error_budget(p);
  const double s = p.phase_noise_std_deg * M_PI / 180.0;
  const double expected = (1.0 - std::exp(-0.5 * s * s)) / 2.0;
  for (const BudgetRow& r : b.rows) {
    if (r.parameter == "phase_noise") EXPECT_NEAR(r.infidelity, expected, 5e-4);
  }
}

TEST(ErrorBudget, RowGrowsWithItsParameter) {
  LinkParameters p = delayed_choice_parameters();
  const auto row = [](const ErrorBudget& b, const std::string& name) {
    for (const BudgetRow& r : b.rows) {
      if (r.parameter == name) return r.infidelity;
    }
    return -1.0;
  };
  const ErrorBudget b0 = error_budget(p);
  p.dephasing = {0.1, 0.1};
  p.double_excitation = {0.2, 0.2};
  const ErrorBudget b1 = error_budget(p);
  EXPECT_GT(row(b1, "dephasing"), row(b0, "dephasing"));
  EXPECT_GT(row(b1, "double_excitation"), row(b0, "double_excitation"));
  EXPECT_NEAR(row(b1, "phase_noise"), row(b0, "phase_noise"), 1e-12);
}

// Paper improvement table: near-term 0.828, future 0.90.
TEST(ErrorBudget, ImprovementScenarios) {
  const auto s = improvement_scenarios();
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].name, "near-term");
  EXPECT_NEAR(s[0].fidelity, 0.828, 0.02);
  EXPECT_EQ(s[1].name, "future");
  EXPECT_NEAR(s[1].fidelity, 0.90, 0.02);
  LinkParameters worse = s[0].parameters;
  worse.phase_noise_std_deg = 45.3;
  EXPECT_LT(heralded_state(worse).mean_fidelity(), s[0].fidelity);
}

}  // namespace
}  // namespace qlink
