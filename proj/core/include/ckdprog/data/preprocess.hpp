#pragma once

#include <vector>

#include "ckdprog/data/feature_matrix.hpp"

namespace ckdprog {

struct ImputePolicy {
  bool standardize_lab = true;
  bool standardize_diagnostic = true;
};

// Per-column statistics fitted on a training fold. Applying the transform to
// held-out rows uses these statistics only, so folds cannot leak.
struct FittedTransform {
  std::vector<std::string> column_names;
  std::vector<ColumnKind> column_kinds;
  std::vector<double> medians;  // imputation value per column
  std::vector<double> means;    // post-imputation mean (0 for untouched columns)
  std::vector<double> stds;     // post-imputation sd   (1 for untouched columns)
  std::vector<bool> scaled;     // whether the column was centered and scaled

  FeatureMatrix apply(const FeatureMatrix& matrix) const;
};

// Fits the imputation/standardization transform on `matrix` and returns the
// transformed copy together with the fitted statistics. Continuous columns
// (lab_aggregate, diagnostic) are median-imputed then z-scored; indicator
// columns have missing entries set to 0 and are otherwise untouched.
// An all-missing column raises ValidationError naming the column.
std::pair<FeatureMatrix, FittedTransform> impute_and_standardize(
    const FeatureMatrix& matrix, const ImputePolicy& policy = {});

}  // namespace ckdprog
