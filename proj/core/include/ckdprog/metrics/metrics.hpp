#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "ckdprog/data/survival_data.hpp"

namespace ckdprog {

// Probability that a random positive outranks a random negative; ties in
// score credit 0.5 (Mann-Whitney form). Requires both classes present.
double auroc(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels);

enum class TieMode {
  kHalfCredit,  // risk ties count 0.5
  kStrict,      // risk ties count 0, as the concordance formula is printed
};

// Harrell's concordance index over pairs (i, j) with T_i < T_j and event
// observed at i: the fraction where risk_i > risk_j. Higher risk must sort
// with earlier events. Requires at least one comparable pair.
double concordance_index(const Eigen::VectorXd& risk, const Eigen::VectorXd& durations,
                         const Eigen::VectorXi& events, TieMode ties = TieMode::kHalfCredit);

using SurvivalFn = std::function<double(Eigen::Index row, double t)>;

enum class BrierMode {
  kLiteral,  // unweighted mean squared difference
  kIpcw,     // inverse-probability-of-censoring weighted (Kaplan-Meier weights)
};

// Brier score at horizon t: mean over subjects of
// (1[T_i > t] - S_hat(t | x_i))^2. The IPCW variant reweights by the
// censoring survival curve; subjects censored before t drop out.
double brier_score(const SurvivalFn& survival, const SurvivalDataset& data, double t,
                   BrierMode mode = BrierMode::kLiteral);

struct DynamicAucPoint {
  double time = 0.0;
  double value = 0.0;
  bool valid = false;  // false when the time had no cases or no controls
};

// Cumulative/dynamic time-dependent AUROC: at each eval time, cases are
// subjects with an observed event by t, controls are subjects still at risk
// past t; censored subjects with T <= t are excluded at that time. Times with
// an empty group come back with valid=false rather than a fabricated value.
std::vector<DynamicAucPoint> dynamic_auc(const Eigen::VectorXd& risk,
                                         const Eigen::VectorXd& durations,
                                         const Eigen::VectorXi& events,
                                         const std::vector<double>& eval_times);

// Kaplan-Meier estimate of the censoring survival function G(t); used by the
// IPCW Brier variant. Returns sorted (time, value) steps.
std::vector<std::pair<double, double>> censoring_kaplan_meier(const Eigen::VectorXd& durations,
                                                              const Eigen::VectorXi& events);

}  // namespace ckdprog
