#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "ckdprog/models/model.hpp"

namespace ckdprog {

struct TuneCandidate {
  TrainConfig config;
  double mean_validation_auroc = 0.0;
};

struct TuneResult {
  TrainConfig best;
  double best_score = 0.0;
  std::vector<TuneCandidate> candidates;  // in sampling order
};

// Uniform random search over the shipped hyperparameter ranges for the lr,
// dt, rf, and gbt families (the network presets are fixed by hand and have no
// space). Each candidate is scored by mean validation AUROC across the given
// folds; the argmax wins, first-sampled on ties.
TuneResult random_search_tune(Family family, const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                              const std::vector<std::vector<int>>& folds, int budget,
                              std::uint64_t seed);

}  // namespace ckdprog
