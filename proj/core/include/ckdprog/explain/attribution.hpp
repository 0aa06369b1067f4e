#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace ckdprog {

// Reference rows standing in for the feature distribution; coalition values
// average the model over these rows.
struct Background {
  Eigen::MatrixXd rows;  // K x N

  void validate() const;
};

// Scalar-output view of a model used by the model-agnostic explainers.
using ModelFn = std::function<double(const Eigen::RowVectorXd&)>;

// Per-sample, per-feature attributions. Every row satisfies
// sum_j values(i, j) = f(x_i) - base_value within the explainer tolerance.
struct AttributionMatrix {
  Eigen::MatrixXd values;  // M x N
  double base_value = 0.0;
  std::vector<std::string> feature_names;
};

struct RankedFeature {
  std::string name;
  double mean_abs_attribution = 0.0;
};

// Descending by mean |attribution|; ties broken lexicographically by name.
using FeatureRanking = std::vector<RankedFeature>;

FeatureRanking mean_abs_ranking(const AttributionMatrix& attributions);

// CSV export: one row per sample, one column per feature, plus a trailing
// `__base_value__` column repeating the shared base value.
std::string attribution_to_csv(const AttributionMatrix& attributions);
void save_attributions(const AttributionMatrix& attributions, const std::string& path);

}  // namespace ckdprog
