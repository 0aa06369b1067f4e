#pragma once

#include <Eigen/Core>
#include <string>

#include "ckdprog/data/feature_matrix.hpp"

namespace ckdprog {

// Per-subject (duration, event indicator, feature vector). Durations are in
// days and strictly positive; zero-duration progressions are shifted to 0.5
// days upstream so event times stay orderable.
struct SurvivalDataset {
  Eigen::VectorXd durations;
  Eigen::VectorXi events;  // 1 = observed, 0 = censored
  FeatureMatrix features;

  Eigen::Index size() const { return durations.size(); }
  int event_count() const { return events.sum(); }

  void validate() const;

  SurvivalDataset select_rows(const std::vector<int>& indices) const;
  SurvivalDataset with_features(FeatureMatrix f) const;
};

// Duration applied when a progression is recorded on the index date itself.
inline constexpr double kZeroDurationShiftDays = 0.5;

// Reads a survival CSV (header: subject_id,duration_days,event). Zero
// durations are shifted to kZeroDurationShiftDays. The returned dataset has
// an empty feature matrix; join with a FeatureMatrix by subject id.
SurvivalDataset load_survival_csv(const std::string& path);

std::string survival_to_csv(const SurvivalDataset& data,
                            const std::vector<std::string>& subject_ids);

// Reorders `data` rows so subject ids line up with `features.row_ids`, then
// attaches the features. Errors when ids do not match one-to-one.
SurvivalDataset align_by_subject(const SurvivalDataset& data,
                                 const std::vector<std::string>& data_ids,
                                 const FeatureMatrix& features);

}  // namespace ckdprog
