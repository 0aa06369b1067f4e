#include "ckdprog/data/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "ckdprog/common/errors.hpp"

namespace ckdprog {

namespace {

bool is_indicator(ColumnKind kind) {
  return kind == ColumnKind::kDemographicIndicator || kind == ColumnKind::kComorbidityIndicator;
}

double median_of(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

FeatureMatrix FittedTransform::apply(const FeatureMatrix& matrix) const {
  if (matrix.column_names != column_names) {
    throw ValidationError("FittedTransform::apply: column names do not match the fitted matrix");
  }
  FeatureMatrix out = matrix;
  for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
    const auto sj = static_cast<std::size_t>(j);
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
      double v = out.values(i, j);
      if (std::isnan(v)) v = medians[sj];
      if (scaled[sj]) v = (v - means[sj]) / stds[sj];
      out.values(i, j) = v;
    }
  }
  return out;
}

std::pair<FeatureMatrix, FittedTransform> impute_and_standardize(const FeatureMatrix& matrix,
                                                                 const ImputePolicy& policy) {
  const auto n_cols = static_cast<std::size_t>(matrix.values.cols());
  if (matrix.column_names.size() != n_cols || matrix.column_kinds.size() != n_cols) {
    throw ValidationError("impute_and_standardize: column metadata does not match value width");
  }
  FittedTransform t;
  t.column_names = matrix.column_names;
  t.column_kinds = matrix.column_kinds;
  t.medians.resize(n_cols);
  t.means.assign(n_cols, 0.0);
  t.stds.assign(n_cols, 1.0);
  t.scaled.assign(n_cols, false);

  const auto rows = matrix.values.rows();
  for (std::size_t j = 0; j < n_cols; ++j) {
    const ColumnKind kind = matrix.column_kinds[j];
    if (is_indicator(kind)) {
      t.medians[j] = 0.0;  // missing indicators impute to absent
      continue;
    }
    std::vector<double> observed;
    observed.reserve(static_cast<std::size_t>(rows));
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double v = matrix.values(i, static_cast<Eigen::Index>(j));
      if (!std::isnan(v)) observed.push_back(v);
    }
    if (observed.empty()) {
      throw ValidationError("impute_and_standardize: column \"" + matrix.column_names[j] +
                            "\" is entirely missing");
    }
    t.medians[j] = median_of(observed);

    const bool standardize = (kind == ColumnKind::kLabAggregate && policy.standardize_lab) ||
                             (kind == ColumnKind::kDiagnostic && policy.standardize_diagnostic);
    if (!standardize) continue;

    double sum = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double v = matrix.values(i, static_cast<Eigen::Index>(j));
      sum += std::isnan(v) ? t.medians[j] : v;
    }
    const double mean = rows > 0 ? sum / static_cast<double>(rows) : 0.0;
    double ss = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double v = matrix.values(i, static_cast<Eigen::Index>(j));
      const double d = (std::isnan(v) ? t.medians[j] : v) - mean;
      ss += d * d;
    }
    double sd = rows > 0 ? std::sqrt(ss / static_cast<double>(rows)) : 1.0;
    if (sd == 0.0) sd = 1.0;  // constant column: center only
    t.means[j] = mean;
    t.stds[j] = sd;
    t.scaled[j] = true;
  }
  return {t.apply(matrix), t};
}

}  // namespace ckdprog
