#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "ckdprog/models/tree.hpp"

namespace ckdprog {

// Bagged classification trees; prediction is the unweighted mean of member
// tree probabilities.
struct ForestModel {
  std::vector<TreeModel> trees;
  int n_features = 0;

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;
};

enum class FeatureSampling { kSqrt, kAll };

struct ForestConfig {
  int n_estimators = 138;
  int max_depth = 33;
  int min_samples_split = 6;
  int min_samples_leaf = 7;
  bool bootstrap = true;
  FeatureSampling feature_sampling = FeatureSampling::kSqrt;
  std::uint64_t seed = 0;
};

// Per-tree bootstrap resampling (rows drawn with replacement, encoded as
// weights) and per-split feature subsampling; each tree consumes its own
// seed stream derived from config.seed.
ForestModel train_forest(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                         const ForestConfig& config = {});

}  // namespace ckdprog
