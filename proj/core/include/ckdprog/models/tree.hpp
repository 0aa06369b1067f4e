#pragma once

#include <Eigen/Core>
#include <vector>

#include "ckdprog/common/rng.hpp"

namespace ckdprog {

// Array-encoded binary decision tree; feature == -1 marks a leaf. Internal
// nodes route x to `left` when x[feature] <= threshold, else to `right`.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf payload: class-1 frequency, or a regression weight
  int n_samples = 0;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int n_features = 0;

  double predict_one(const Eigen::RowVectorXd& x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  void validate() const;
};

struct TreeConfig {
  int max_depth = 6;
  int min_samples_split = 6;
  int min_samples_leaf = 11;
};

// Greedy recursive partitioning minimizing weighted log-loss impurity.
// Zero-gain splits are admitted (otherwise symmetric interactions such as
// XOR would never get their first cut); ties prefer the lowest feature
// index, then the lowest threshold. Leaves store the weighted class-1
// frequency.
TreeModel train_tree(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                     const TreeConfig& config = {});

// Ensemble-facing grower: per-row weights (bootstrap counts) and optional
// per-split feature subsampling. max_features <= 0 or >= n_features means
// all features; otherwise rng must be non-null.
TreeModel grow_classification_tree(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                                   const Eigen::VectorXd& sample_weight, const TreeConfig& config,
                                   int max_features, Rng* rng);

}  // namespace ckdprog
