#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ckdprog/data/synthetic.hpp"
#include "ckdprog/metrics/metrics.hpp"
#include "ckdprog/models/model.hpp"
#include "ckdprog/pipeline/kfre.hpp"
#include "ckdprog/survival/cox.hpp"

namespace ckdprog {

std::string to_string(BrierMode mode);
BrierMode brier_mode_from_string(const std::string& text);

// Evaluation horizons one through five years, in days.
std::vector<double> default_horizons_days();

// Hyperparameter blocks for every trainable family. A run consults the block
// matching its configured family; --union-all-families consults all six.
struct FamilyHyperparameters {
  LogisticConfig logistic;
  TreeConfig tree;
  ForestConfig forest;
  BoostedConfig boosted;
  MlpConfig mlp = plain_mlp_defaults();
  MlpConfig resmlp = residual_mlp_defaults();
};

// Where run input rows come from: a CSV pair or the synthetic generator.
struct PipelineInputs {
  std::string features_csv;
  std::string survival_csv;
  bool use_synthetic = false;
  SyntheticConfig synthetic;
};

struct PipelineConfig {
  Family family = Family::kGbt;
  int top_j = 40;
  int k_folds = 5;
  double penalizer = 0.0007;
  double tau = 0.5;
  std::uint64_t seed = 0;
  int jobs = 1;
  TieRule tie_rule = TieRule::kEfron;
  BrierMode brier_mode = BrierMode::kLiteral;
  bool union_all_families = false;
  std::vector<double> horizons_days = default_horizons_days();
  int explain_samples = 64;     // train rows explained per fold
  int background_rows = 100;    // attribution background sample size
  int kernel_coalitions = 256;  // kernel explainer coalition budget
  int kernel_background = 20;   // background cap for the kernel explainer
  Kfre8Spec kfre8 = Kfre8Spec::synthetic_default();
  FamilyHyperparameters hyperparameters;
  PipelineInputs inputs;

  void validate() const;

  // TrainConfig for `family` assembled from the matching hyperparameter
  // block. The caller fills the seed.
  TrainConfig train_config_for(Family family) const;
};

// JSON round trip; the document mirrors PipelineConfig field for field.
// Missing fields keep their defaults, unknown fields are rejected.
PipelineConfig pipeline_config_from_json(const std::string& text);
std::string pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig load_pipeline_config(const std::string& path);

}  // namespace ckdprog
