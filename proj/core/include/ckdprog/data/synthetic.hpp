#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "ckdprog/data/survival_data.hpp"

namespace ckdprog {

// Configuration for the synthetic cohort generator. Features are standard
// normal; event times follow a Weibull baseline with proportional hazard
// exp(beta^T x); censoring is independent exponential with a rate calibrated
// to hit censor_rate_target.
struct SyntheticConfig {
  int n_subjects = 1000;
  int n_signal_features = 0;   // must equal true_beta.size()
  int n_noise_features = 0;
  Eigen::VectorXd true_beta;
  double baseline_shape = 1.5;   // Weibull k
  double baseline_scale = 365.0; // Weibull lambda, in days
  double censor_rate_target = 0.3;
  std::uint64_t seed = 0;

  // When set, eight extra zero-coefficient columns named kfre_* are appended
  // so a Kfre8Spec can always be resolved against the generated matrix.
  bool with_kfre_columns = false;

  void validate() const;
};

struct SyntheticGroundTruth {
  Eigen::VectorXd true_beta;     // aligned to the signal columns
  std::uint64_t seed = 0;
  double censor_fraction = 0.0;  // realized
  double censor_rate = 0.0;      // calibrated exponential rate

  std::string to_json() const;   // {"true_beta": [...], "seed": ..., "censor_fraction": ...}
};

struct SyntheticCohort {
  FeatureMatrix features;
  SurvivalDataset survival;  // features attached and row-aligned
  SyntheticGroundTruth truth;
  std::vector<int> progressed;  // classifier target: the event indicator
};

// Names of the eight KFRE-8 columns the generator appends under
// with_kfre_columns, in role order age, sex, eGFR, UACR, calcium, phosphorus,
// bicarbonate, albumin.
const std::vector<std::string>& synthetic_kfre_column_names();

// Deterministic in config.seed. Throws if the censoring calibration cannot
// reach the target within its iteration budget.
SyntheticCohort generate_synthetic_cohort(const SyntheticConfig& config);

}  // namespace ckdprog
