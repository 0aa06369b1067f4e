#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "ckdprog/models/tree.hpp"

namespace ckdprog {

struct BoostedConfig {
  int n_estimators = 83;
  int max_depth = 14;
  double learning_rate = 0.22;
  double gamma = 2.61;            // minimum split gain
  double min_child_weight = 1.0;  // minimum hessian sum per child
  double subsample = 0.78;
  double colsample_bytree = 0.76;
  double colsample_bylevel = 0.56;
  double reg_lambda = 1.0;
  std::uint64_t seed = 0;
};

// Additive logistic model: margin(x) = base_score + lr * sum_k f_k(x) with
// each f_k a regression tree over gradient/hessian statistics. Trees store
// unscaled leaf weights; the learning rate is applied at accumulation.
struct BoostedModel {
  std::vector<TreeModel> trees;
  double base_score = 0.0;  // log odds of the training base rate
  double learning_rate = 0.22;
  int n_features = 0;

  Eigen::VectorXd predict_margin(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;
};

// Second-order boosting on logistic loss. Split gain
//   0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)) - gamma
// must be strictly positive; leaf weight is -G/(H+lambda). Rows are
// subsampled without replacement per round, columns per tree and again per
// depth level. Saturated predictions (hessians all zero) stop the loop early
// and the model built so far is returned.
BoostedModel train_gbt(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                       const BoostedConfig& config = {});

}  // namespace ckdprog
