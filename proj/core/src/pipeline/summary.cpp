#include "ckdprog/pipeline/summary.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/stats.hpp"

namespace ckdprog {

CoxSummaryTable cox_summary(const FittedCox& fitted, const SurvivalDataset& dataset) {
  dataset.validate();
  const Eigen::Index m = fitted.beta.size();
  if (dataset.features.values.cols() != m) {
    throw ValidationError("cox_summary: dataset columns do not match the fitted coefficients");
  }

  const CoxObjectiveEval eval =
      neg_log_partial_likelihood(fitted.beta, dataset, fitted.penalizer, fitted.tie_rule);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(eval.hessian);
  if (!lu.isInvertible()) {
    // Columns with nonzero weight in any null-space direction form the
    // dependent group; name them so the caller can drop one.
    const Eigen::MatrixXd kernel = lu.kernel();
    std::string columns;
    for (Eigen::Index jcol = 0; jcol < m; ++jcol) {
      if (kernel.row(jcol).cwiseAbs().maxCoeff() > 1e-9) {
        if (!columns.empty()) columns += ", ";
        columns += fitted.feature_names[static_cast<std::size_t>(jcol)];
      }
    }
    throw ValidationError("cox_summary: singular information matrix; collinear columns: " +
                          columns);
  }
  const Eigen::MatrixXd covariance = lu.inverse();

  CoxSummaryTable table;
  table.rows.resize(static_cast<std::size_t>(m));
  for (Eigen::Index jcol = 0; jcol < m; ++jcol) {
    CoxSummaryRow& row = table.rows[static_cast<std::size_t>(jcol)];
    row.feature = fitted.feature_names[static_cast<std::size_t>(jcol)];
    row.beta = fitted.beta(jcol);
    row.se = std::sqrt(covariance(jcol, jcol));
    row.hazard_ratio = std::exp(row.beta);
    row.ci_lower = std::exp(row.beta - 1.96 * row.se);
    row.ci_upper = std::exp(row.beta + 1.96 * row.se);
    row.p_value = normal_two_sided_p(row.beta / row.se);
  }
  return table;
}

}  // namespace ckdprog
