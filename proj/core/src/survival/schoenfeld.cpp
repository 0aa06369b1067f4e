#include "ckdprog/survival/schoenfeld.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/stats.hpp"

namespace ckdprog {

SchoenfeldResult schoenfeld_residuals(const FittedCox& fitted, const SurvivalDataset& dataset) {
  dataset.validate();
  const Eigen::MatrixXd& X = dataset.features.values;
  if (fitted.beta.size() != X.cols())
    throw ValidationError("fitted model and dataset disagree on feature count");
  const int total_events = dataset.events.sum();
  if (total_events < 3)
    throw ValidationError("Schoenfeld slope test needs at least 3 events, got " +
                          std::to_string(total_events));

  const Eigen::Index m = X.cols();
  const Eigen::VectorXd eta = X * fitted.beta;
  const double shift = eta.maxCoeff();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(X.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (dataset.durations[a] != dataset.durations[b])
      return dataset.durations[a] > dataset.durations[b];
    return a < b;
  });

  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(m);

  SchoenfeldResult result;
  result.feature_names = dataset.features.column_names;
  result.residuals.resize(total_events, m);

  // Filled descending, flipped to ascending afterwards.
  Eigen::Index row = total_events;
  std::size_t pos = 0;
  while (pos < order.size()) {
    const double t = dataset.durations[order[pos]];
    double d0 = 0.0;
    Eigen::VectorXd d1 = Eigen::VectorXd::Zero(m);
    std::vector<Eigen::Index> group_events;
    while (pos < order.size() && dataset.durations[order[pos]] == t) {
      const Eigen::Index i = order[pos];
      const double r = std::exp(eta[i] - shift);
      const Eigen::VectorXd xi = X.row(i).transpose();
      s0 += r;
      s1 += r * xi;
      if (dataset.events[i] == 1) {
        d0 += r;
        d1 += r * xi;
        group_events.push_back(i);
      }
      ++pos;
    }
    const int d = static_cast<int>(group_events.size());
    if (d == 0) continue;

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (int l = 0; l < d; ++l) {
      const double frac = fitted.tie_rule == TieRule::kEfron ? static_cast<double>(l) / d : 0.0;
      mean += (s1 - frac * d1) / (s0 - frac * d0);
    }
    mean /= d;
    for (const Eigen::Index i : group_events) {
      --row;
      result.residuals.row(row) = X.row(i) - mean.transpose();
      result.event_times.push_back(t);
    }
  }
  std::reverse(result.event_times.begin(), result.event_times.end());

  // Midranks of event times (ties share a rank) as the time axis of the test.
  std::vector<double> ranks(result.event_times.size());
  std::size_t i = 0;
  while (i < result.event_times.size()) {
    std::size_t j = i;
    while (j < result.event_times.size() && result.event_times[j] == result.event_times[i]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[k] = midrank;
    i = j;
  }

  result.slope.resize(m);
  result.p_values.resize(m);
  const int df = total_events - 2;
  for (Eigen::Index f = 0; f < m; ++f) {
    const Eigen::VectorXd column = result.residuals.col(f);
    const double rho = pearson_correlation(column.data(), ranks.data(), total_events);
    result.slope[f] = rho;
    if (!std::isfinite(rho) || std::abs(rho) >= 1.0) {
      // Degenerate column (constant residuals) or perfect correlation.
      result.slope[f] = std::isfinite(rho) ? rho : 0.0;
      result.p_values[f] = std::isfinite(rho) && std::abs(rho) >= 1.0 ? 0.0 : 1.0;
      continue;
    }
    const double tstat = rho * std::sqrt(df / (1.0 - rho * rho));
    result.p_values[f] = student_t_two_sided_p(tstat, df);
  }
  return result;
}

}  // namespace ckdprog
