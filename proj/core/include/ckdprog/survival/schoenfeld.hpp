#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "ckdprog/survival/cox.hpp"

namespace ckdprog {

// One residual row per observed event, ordered by ascending event time. At
// the fitted beta the column sums reproduce the score and are therefore ~0.
struct SchoenfeldResult {
  std::vector<double> event_times;
  Eigen::MatrixXd residuals;  // events x features
  std::vector<std::string> feature_names;
  Eigen::VectorXd slope;     // Pearson correlation of residuals vs event-time rank
  Eigen::VectorXd p_values;  // two-sided, Student-t with (events - 2) df
};

// r_i = x_i - weighted risk-set mean at the event time, weights exp(beta^T x).
// Tied event times share the tie-rule-adjusted mean averaged over the tie
// group so the residuals stay consistent with the fitting objective. Fewer
// than 3 events is an error: the slope test needs df >= 1.
SchoenfeldResult schoenfeld_residuals(const FittedCox& fitted, const SurvivalDataset& dataset);

}  // namespace ckdprog
