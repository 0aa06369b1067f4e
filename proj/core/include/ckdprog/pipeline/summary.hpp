#pragma once

#include <string>
#include <vector>

#include "ckdprog/data/survival_data.hpp"
#include "ckdprog/survival/cox.hpp"

namespace ckdprog {

struct CoxSummaryRow {
  std::string feature;
  double beta = 0.0;
  double hazard_ratio = 1.0;
  double se = 0.0;
  double ci_lower = 1.0;  // exp(beta - 1.96 se)
  double ci_upper = 1.0;  // exp(beta + 1.96 se)
  double p_value = 1.0;   // two-sided Wald
};

struct CoxSummaryTable {
  std::vector<CoxSummaryRow> rows;  // one per feature, fit order
};

// Standard errors come from the inverse of the penalized observed information
// at the fitted coefficients. A singular information matrix raises
// ValidationError listing the collinear columns.
CoxSummaryTable cox_summary(const FittedCox& fitted, const SurvivalDataset& dataset);

}  // namespace ckdprog
