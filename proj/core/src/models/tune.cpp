#include "ckdprog/models/tune.hpp"

#include <algorithm>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/rng.hpp"
#include "ckdprog/data/folds.hpp"
#include "ckdprog/metrics/metrics.hpp"

namespace ckdprog {
namespace {

constexpr std::uint64_t kCandidateStream = 0x54554E45;
constexpr std::uint64_t kModelStream = 0x54554E46;

TrainConfig sample_candidate(Family family, Rng& rng) {
  TrainConfig config = default_train_config(family);
  switch (family) {
    case Family::kLr:
      config.logistic.c = rng.uniform(0.01, 1.0);
      break;
    case Family::kDt:
      config.tree.max_depth = rng.uniform_int(1, 50);
      config.tree.min_samples_split = rng.uniform_int(2, 20);
      config.tree.min_samples_leaf = rng.uniform_int(1, 20);
      break;
    case Family::kRf:
      config.forest.max_depth = rng.uniform_int(2, 50);
      config.forest.min_samples_split = rng.uniform_int(2, 20);
      config.forest.min_samples_leaf = rng.uniform_int(1, 20);
      config.forest.n_estimators = rng.uniform_int(50, 200);
      break;
    case Family::kGbt:
      config.boosted.max_depth = rng.uniform_int(5, 20);
      config.boosted.n_estimators = rng.uniform_int(50, 150);
      config.boosted.min_child_weight = rng.uniform_int(1, 10);
      config.boosted.gamma = rng.uniform(0.5, 3.0);
      config.boosted.subsample = rng.uniform(0.6, 1.0);
      config.boosted.colsample_bytree = rng.uniform(0.6, 1.0);
      config.boosted.colsample_bylevel = rng.uniform(0.01, 0.6);
      config.boosted.learning_rate = rng.uniform(0.01, 0.3);
      break;
    case Family::kMlp:
    case Family::kResMlp:
    case Family::kBaseline:
      throw ValidationError("family '" + to_string(family) + "' has no random-search space");
  }
  return config;
}

}  // namespace

TuneResult random_search_tune(Family family, const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                              const std::vector<std::vector<int>>& folds, int budget,
                              std::uint64_t seed) {
  if (budget < 1) throw ValidationError("search budget must be >= 1");
  if (folds.size() < 2) throw ValidationError("tuning needs at least 2 folds");

  TuneResult result;
  for (int c = 0; c < budget; ++c) {
    Rng rng(derive_seed(seed, kCandidateStream, static_cast<std::uint64_t>(c)));
    TrainConfig candidate = sample_candidate(family, rng);

    double sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const std::vector<int> train_rows =
          train_indices(folds, static_cast<int>(X.rows()), static_cast<int>(f));
      Eigen::MatrixXd x_train(train_rows.size(), X.cols());
      Eigen::VectorXi y_train(train_rows.size());
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        x_train.row(static_cast<Eigen::Index>(i)) = X.row(train_rows[i]);
        y_train[static_cast<Eigen::Index>(i)] = y[train_rows[i]];
      }
      const std::vector<int>& val_rows = folds[f];
      Eigen::MatrixXd x_val(val_rows.size(), X.cols());
      Eigen::VectorXi y_val(val_rows.size());
      for (std::size_t i = 0; i < val_rows.size(); ++i) {
        x_val.row(static_cast<Eigen::Index>(i)) = X.row(val_rows[i]);
        y_val[static_cast<Eigen::Index>(i)] = y[val_rows[i]];
      }

      candidate.seed = derive_seed(seed, kModelStream,
                                   static_cast<std::uint64_t>(c) * folds.size() + f);
      const AnyModel model = train_model(x_train, y_train, candidate);
      sum += auroc(predict_proba(model, x_val), y_val);
    }
    result.candidates.push_back({candidate, sum / static_cast<double>(folds.size())});
  }

  const auto best = std::max_element(
      result.candidates.begin(), result.candidates.end(),
      [](const TuneCandidate& a, const TuneCandidate& b) {
        return a.mean_validation_auroc < b.mean_validation_auroc;
      });
  result.best = best->config;
  result.best_score = best->mean_validation_auroc;
  return result;
}

}  // namespace ckdprog
