#include "ckdprog/models/forest.hpp"

#include <cmath>

#include "ckdprog/common/errors.hpp"

namespace ckdprog {

namespace {
constexpr std::uint64_t kForestStream = 0x464F5245;  // per-tree seed stream tag
}

Eigen::VectorXd ForestModel::predict_proba(const Eigen::MatrixXd& X) const {
  if (trees.empty()) throw ValidationError("forest has no trees");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(X.rows());
  for (const TreeModel& tree : trees) sum += tree.predict(X);
  return sum / static_cast<double>(trees.size());
}

ForestModel train_forest(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                         const ForestConfig& config) {
  if (config.n_estimators < 1) throw ValidationError("n_estimators must be >= 1");
  if (X.rows() == 0) throw ValidationError("cannot train on an empty matrix");

  const int n = static_cast<int>(X.rows());
  const int n_features = static_cast<int>(X.cols());
  const int max_features =
      config.feature_sampling == FeatureSampling::kSqrt
          ? std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n_features))))
          : 0;

  TreeConfig tree_config;
  tree_config.max_depth = config.max_depth;
  tree_config.min_samples_split = config.min_samples_split;
  tree_config.min_samples_leaf = config.min_samples_leaf;

  ForestModel model;
  model.n_features = n_features;
  model.trees.reserve(static_cast<std::size_t>(config.n_estimators));
  for (int t = 0; t < config.n_estimators; ++t) {
    Rng rng(derive_seed(config.seed, kForestStream, static_cast<std::uint64_t>(t)));
    Eigen::VectorXd weight;
    if (config.bootstrap) {
      weight = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < n; ++i) weight[static_cast<Eigen::Index>(rng.uniform_int(0, n - 1))] += 1.0;
    } else {
      weight = Eigen::VectorXd::Ones(n);
    }
    model.trees.push_back(
        grow_classification_tree(X, y, weight, tree_config, max_features, &rng));
  }
  return model;
}

}  // namespace ckdprog
