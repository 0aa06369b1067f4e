#pragma once

#include <Eigen/Core>
#include <string>
#include <variant>

#include "ckdprog/models/boosted.hpp"
#include "ckdprog/models/forest.hpp"
#include "ckdprog/models/linear.hpp"
#include "ckdprog/models/mlp.hpp"
#include "ckdprog/models/tree.hpp"

namespace ckdprog {

enum class Family { kLr, kDt, kRf, kGbt, kMlp, kResMlp, kBaseline };

std::string to_string(Family family);
Family family_from_string(const std::string& text);

using AnyModel = std::variant<LinearModel, TreeModel, ForestModel, BoostedModel, MlpModel>;

Family model_family(const AnyModel& model);

Eigen::VectorXd predict_proba(const AnyModel& model, const Eigen::MatrixXd& X);

// Additive output each model family is naturally decomposed in: the log-odds
// margin for logistic, boosted, and network models; the probability itself
// for single trees and forests.
Eigen::VectorXd predict_margin(const AnyModel& model, const Eigen::MatrixXd& X);
bool margin_is_log_odds(Family family);

// Label 1 iff predicted probability >= tau.
int classify(const AnyModel& model, const Eigen::RowVectorXd& x, double tau);

// Family-specific hyperparameters under one roof; only the member matching
// `family` is consulted. Defaults reproduce the shipped tuned presets.
struct TrainConfig {
  Family family = Family::kLr;
  LogisticConfig logistic;
  TreeConfig tree;
  ForestConfig forest;
  BoostedConfig boosted;
  MlpConfig mlp;
  std::uint64_t seed = 0;
};

TrainConfig default_train_config(Family family);

// Dispatches to the family trainer; seeds are copied from config.seed into
// the family config. `baseline` has no classifier and is rejected here.
AnyModel train_model(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                     const TrainConfig& config);

}  // namespace ckdprog
