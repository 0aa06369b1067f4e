#pragma once

#include "ckdprog/explain/attribution.hpp"
#include "ckdprog/models/boosted.hpp"
#include "ckdprog/models/forest.hpp"
#include "ckdprog/models/tree.hpp"

namespace ckdprog {

// Interventional Shapley values for tree ensembles, exact per background row.
// Walking a tree with x and a background row b partitions the leaves by which
// features must come from x (set P) and which from b (set Q); a leaf with
// value v adds v*(p-1)!*q!/(p+q)! to each phi in P and subtracts
// v*p!*(q-1)!/(p+q)! from each phi in Q. Results average over background
// rows and add across ensemble members.
//
// Attribution space follows each ensemble's additive output: probability for
// single trees and forests, the log-odds margin for boosted models.
Eigen::VectorXd tree_shap(const TreeModel& model, const Eigen::RowVectorXd& x,
                          const Background& background);
Eigen::VectorXd tree_shap(const ForestModel& model, const Eigen::RowVectorXd& x,
                          const Background& background);
Eigen::VectorXd tree_shap(const BoostedModel& model, const Eigen::RowVectorXd& x,
                          const Background& background);

}  // namespace ckdprog
