#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ckdprog/data/feature_matrix.hpp"
#include "ckdprog/data/preprocess.hpp"
#include "ckdprog/data/survival_data.hpp"
#include "ckdprog/explain/attribution.hpp"
#include "ckdprog/metrics/metrics.hpp"
#include "ckdprog/models/model.hpp"
#include "ckdprog/pipeline/config.hpp"
#include "ckdprog/pipeline/summary.hpp"

namespace ckdprog {

// Per-stage seed streams; every fold derives its own child seeds so folds
// stay independent and reorderable.
inline constexpr std::uint64_t kFoldSplitStream = 0x464C4453;  // fold assignment
inline constexpr std::uint64_t kTrainStream = 0x5452414E;      // classifier training
inline constexpr std::uint64_t kBackgroundStream = 0x424B4744; // attribution background
inline constexpr std::uint64_t kExplainStream = 0x4558504C;    // explained-row sample

struct FoldReport {
  int fold = 0;
  // In-memory artifacts for leakage auditing; not serialized.
  std::vector<int> train_rows;
  std::vector<int> test_rows;
  FittedTransform transform;  // imputation statistics, train fold only
  FeatureRanking ranking;     // empty for the baseline family

  double classifier_auroc = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> selected_features;
  Eigen::VectorXd cox_beta;  // aligned with selected_features
  double c_index_train = std::numeric_limits<double>::quiet_NaN();
  double c_index_test = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> brier;  // per horizon, config order
  std::vector<DynamicAucPoint> dynamic_auc_points;
};

struct AggregateStat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();  // sample sd, n-1
  int n = 0;
};

struct SchoenfeldSummary {
  std::vector<std::string> features;
  std::vector<double> slopes;
  std::vector<double> p_values;
  int n_events = 0;
};

struct RunReport {
  PipelineConfig config;
  std::vector<FoldReport> folds;
  int best_fold = 0;  // highest held-out C-index; first fold wins ties
  AggregateStat classifier_auroc;
  AggregateStat c_index_test;
  std::vector<AggregateStat> brier;        // per horizon
  std::vector<AggregateStat> dynamic_auc;  // per horizon, over valid points
  CoxSummaryTable cox_summary_table;       // best fold
  SchoenfeldSummary schoenfeld;            // best fold
};

// Family-matched attribution: exact linear SHAP for lr, the interventional
// tree walker for dt/rf/gbt, batched kernel SHAP with a capped background for
// the network families. Values live in the model's native additive output
// space (log-odds margin for lr/gbt/mlp/resmlp, probability for dt/rf); the
// base value is the expected output over the background actually used.
AttributionMatrix family_matched_attributions(const AnyModel& model, const Eigen::MatrixXd& rows,
                                              const Background& background,
                                              const std::vector<std::string>& names,
                                              const PipelineConfig& config,
                                              std::uint64_t kernel_seed);

// The full per-fold flow: impute/standardize on the train fold, train the
// classifier, attribute with the family-matched explainer, rank, select F
// (union with KFRE-8), fit Cox on the train fold restricted to F, evaluate
// C-index/Brier/dynamic AUROC on the held-out fold. The baseline family
// skips training and selection and uses the KFRE-8 columns alone. Any stage
// error aborts the run, prefixed with the fold index and stage name.
RunReport run_pipeline(const FeatureMatrix& features, const SurvivalDataset& survival,
                       const std::vector<int>& labels, const PipelineConfig& config);

}  // namespace ckdprog
