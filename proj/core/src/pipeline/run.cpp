#include "ckdprog/pipeline/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/rng.hpp"
#include "ckdprog/data/folds.hpp"
#include "ckdprog/explain/kernel_shap.hpp"
#include "ckdprog/explain/linear_shap.hpp"
#include "ckdprog/explain/tree_shap.hpp"
#include "ckdprog/models/model.hpp"
#include "ckdprog/pipeline/select.hpp"
#include "ckdprog/survival/schoenfeld.hpp"

namespace ckdprog {
namespace {

constexpr std::uint64_t kKernelRowStream = 0x4B524F57;

// Prefixes any stage error with the fold index and stage name, preserving the
// error class so the CLI still distinguishes validation from runtime failures.
template <typename Fn>
auto fold_stage(int fold, const char* stage, Fn&& fn) -> decltype(fn()) {
  const auto prefix = [&](const char* what) {
    return "fold " + std::to_string(fold) + ", stage " + stage + ": " + what;
  };
  try {
    return fn();
  } catch (const CapacityError& e) {
    throw CapacityError(prefix(e.what()));
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(prefix(e.what()), e.gradient_norm, e.iterations);
  } catch (const ValidationError& e) {
    throw ValidationError(prefix(e.what()));
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix(e.what()));
  }
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& source, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = source.row(rows[i]);
  return out;
}

SurvivalDataset slice_survival(const SurvivalDataset& survival, const std::vector<int>& rows,
                               FeatureMatrix features) {
  SurvivalDataset out;
  out.durations.resize(static_cast<Eigen::Index>(rows.size()));
  out.events.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.durations(static_cast<Eigen::Index>(i)) = survival.durations(rows[i]);
    out.events(static_cast<Eigen::Index>(i)) = survival.events(rows[i]);
  }
  out.features = std::move(features);
  return out;
}

int family_ordinal(Family family) { return static_cast<int>(family); }

std::uint64_t fold_train_seed(const PipelineConfig& config, int fold, Family family) {
  if (!config.union_all_families) {
    return derive_seed(config.seed, kTrainStream, static_cast<std::uint64_t>(fold));
  }
  return derive_seed(config.seed, kTrainStream,
                     static_cast<std::uint64_t>(fold) * 8 + static_cast<std::uint64_t>(family_ordinal(family)));
}

struct FoldArtifacts {
  FittedCox fitted;
  SurvivalDataset cox_train;
};

}  // namespace

AttributionMatrix family_matched_attributions(const AnyModel& model, const Eigen::MatrixXd& rows,
                                              const Background& background,
                                              const std::vector<std::string>& names,
                                              const PipelineConfig& config,
                                              std::uint64_t kernel_seed) {
  AttributionMatrix attr;
  attr.feature_names = names;
  attr.values.resize(rows.rows(), rows.cols());
  const Family family = model_family(model);
  if (family == Family::kMlp || family == Family::kResMlp) {
    const Eigen::Index capped =
        std::min<Eigen::Index>(config.kernel_background, background.rows.rows());
    Background kernel_bg{background.rows.topRows(capped)};
    const BatchModelFn fn = [&model](const Eigen::MatrixXd& batch) {
      return predict_margin(model, batch);
    };
    attr.base_value = fn(kernel_bg.rows).mean();
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      attr.values.row(i) =
          kernel_shap(fn, rows.row(i), kernel_bg, config.kernel_coalitions,
                      derive_seed(kernel_seed, kKernelRowStream, static_cast<std::uint64_t>(i)));
    }
    return attr;
  }

  attr.base_value = predict_margin(model, background.rows).mean();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Eigen::RowVectorXd x = rows.row(i);
    switch (family) {
      case Family::kLr:
        attr.values.row(i) = linear_shap(std::get<LinearModel>(model), x, background);
        break;
      case Family::kDt:
        attr.values.row(i) = tree_shap(std::get<TreeModel>(model), x, background);
        break;
      case Family::kRf:
        attr.values.row(i) = tree_shap(std::get<ForestModel>(model), x, background);
        break;
      case Family::kGbt:
        attr.values.row(i) = tree_shap(std::get<BoostedModel>(model), x, background);
        break;
      default:
        throw ValidationError("no explainer for family " + to_string(family));
    }
  }
  return attr;
}

namespace {

AggregateStat aggregate(const std::vector<double>& values) {
  AggregateStat stat;
  std::vector<double> finite;
  for (double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  stat.n = static_cast<int>(finite.size());
  if (finite.empty()) return stat;
  double sum = 0.0;
  for (double v : finite) sum += v;
  stat.mean = sum / static_cast<double>(finite.size());
  if (finite.size() >= 2) {
    double ss = 0.0;
    for (double v : finite) ss += (v - stat.mean) * (v - stat.mean);
    stat.sd = std::sqrt(ss / static_cast<double>(finite.size() - 1));
  }
  return stat;
}

void run_one_fold(int f, const FeatureMatrix& features, const SurvivalDataset& survival,
                  const Eigen::VectorXi& labels, const PipelineConfig& config,
                  const std::vector<std::vector<int>>& folds, FoldReport& report,
                  FoldArtifacts& artifacts) {
  const int n = static_cast<int>(features.values.rows());
  report.fold = f;
  report.test_rows = folds[static_cast<std::size_t>(f)];
  report.train_rows = train_indices(folds, n, f);

  auto fitted_pair = fold_stage(f, "impute", [&] {
    return impute_and_standardize(features.select_rows(report.train_rows));
  });
  FeatureMatrix train_x = std::move(fitted_pair.first);
  report.transform = std::move(fitted_pair.second);
  const FeatureMatrix test_x = fold_stage(f, "impute", [&] {
    return report.transform.apply(features.select_rows(report.test_rows));
  });

  Eigen::VectorXi y_train(static_cast<Eigen::Index>(report.train_rows.size()));
  for (std::size_t i = 0; i < report.train_rows.size(); ++i) {
    y_train(static_cast<Eigen::Index>(i)) = labels(report.train_rows[i]);
  }
  Eigen::VectorXi y_test(static_cast<Eigen::Index>(report.test_rows.size()));
  for (std::size_t i = 0; i < report.test_rows.size(); ++i) {
    y_test(static_cast<Eigen::Index>(i)) = labels(report.test_rows[i]);
  }

  std::vector<std::string> selected;
  if (config.family == Family::kBaseline) {
    selected = config.kfre8.column_list();
  } else {
    const int n_train = static_cast<int>(report.train_rows.size());
    Rng background_rng(derive_seed(config.seed, kBackgroundStream, static_cast<std::uint64_t>(f)));
    const std::vector<int> background_idx = background_rng.sample_without_replacement(
        n_train, std::min(config.background_rows, n_train));
    Background background{gather_rows(train_x.values, background_idx)};

    Rng explain_rng(derive_seed(config.seed, kExplainStream, static_cast<std::uint64_t>(f)));
    const std::vector<int> explain_idx = explain_rng.sample_without_replacement(
        n_train, std::min(config.explain_samples, n_train));
    const Eigen::MatrixXd explained = gather_rows(train_x.values, explain_idx);

    const std::uint64_t kernel_seed = derive_seed(config.seed, kExplainStream,
                                                  0x10000u + static_cast<std::uint64_t>(f));

    std::vector<Family> families;
    if (config.union_all_families) {
      families = {Family::kLr, Family::kDt, Family::kRf,
                  Family::kGbt, Family::kMlp, Family::kResMlp};
    } else {
      families = {config.family};
    }

    std::vector<std::string> union_order;
    for (Family fam : families) {
      TrainConfig train_config = config.train_config_for(fam);
      train_config.seed = fold_train_seed(config, f, fam);
      const AnyModel model = fold_stage(f, "train", [&] {
        return train_model(train_x.values, y_train, train_config);
      });
      const AttributionMatrix attributions = fold_stage(f, "explain", [&] {
        return family_matched_attributions(model, explained, background, train_x.column_names, config,
                            derive_seed(kernel_seed, 0x46414D00u, static_cast<std::uint64_t>(family_ordinal(fam))));
      });
      const FeatureRanking ranking = fold_stage(f, "rank", [&] {
        return mean_abs_ranking(attributions);
      });
      const SelectionResult selection = fold_stage(f, "select", [&] {
        return select_features(ranking, config.top_j, config.kfre8);
      });
      if (fam == config.family) {
        report.ranking = ranking;
        report.classifier_auroc = fold_stage(f, "auroc", [&] {
          return auroc(predict_proba(model, test_x.values), y_test);
        });
      }
      if (!config.union_all_families) {
        selected = selection.features;
      } else {
        // Union across families: each family contributes its top-j block in
        // rank order; KFRE-8 columns are appended once at the end.
        const int take = std::min<int>(config.top_j, static_cast<int>(ranking.size()));
        for (int i = 0; i < take; ++i) {
          const std::string& name = ranking[static_cast<std::size_t>(i)].name;
          if (std::find(union_order.begin(), union_order.end(), name) == union_order.end()) {
            union_order.push_back(name);
          }
        }
      }
    }
    if (config.union_all_families) {
      for (const std::string& column : config.kfre8.column_list()) {
        if (std::find(union_order.begin(), union_order.end(), column) == union_order.end()) {
          union_order.push_back(column);
        }
      }
      selected = std::move(union_order);
    }
  }
  report.selected_features = selected;

  FeatureMatrix train_f = fold_stage(f, "cox", [&] { return train_x.select_columns(selected); });
  FeatureMatrix test_f = fold_stage(f, "cox", [&] { return test_x.select_columns(selected); });
  artifacts.cox_train = slice_survival(survival, report.train_rows, std::move(train_f));
  const SurvivalDataset cox_test = slice_survival(survival, report.test_rows, std::move(test_f));

  CoxFitOptions options;
  options.penalizer = config.penalizer;
  options.tie_rule = config.tie_rule;
  artifacts.fitted = fold_stage(f, "cox", [&] { return fit_cox(artifacts.cox_train, options); });
  report.cox_beta = artifacts.fitted.beta;

  fold_stage(f, "evaluate", [&] {
    const Eigen::VectorXd risk_train =
        prognostic_index(artifacts.fitted, artifacts.cox_train.features.values);
    const Eigen::VectorXd risk_test = prognostic_index(artifacts.fitted, cox_test.features.values);
    report.c_index_train =
        concordance_index(risk_train, artifacts.cox_train.durations, artifacts.cox_train.events);
    report.c_index_test = concordance_index(risk_test, cox_test.durations, cox_test.events);

    const SurvivalFn survival_fn = [&](Eigen::Index row, double t) {
      return predict_survival(artifacts.fitted, cox_test.features.values.row(row).transpose(), t);
    };
    report.brier.clear();
    for (double horizon : config.horizons_days) {
      report.brier.push_back(brier_score(survival_fn, cox_test, horizon, config.brier_mode));
    }
    report.dynamic_auc_points =
        dynamic_auc(risk_test, cox_test.durations, cox_test.events, config.horizons_days);
    return 0;
  });
}

}  // namespace

RunReport run_pipeline(const FeatureMatrix& features, const SurvivalDataset& survival,
                       const std::vector<int>& labels, const PipelineConfig& config) {
  config.validate();
  const int n = static_cast<int>(features.values.rows());
  if (n == 0) throw ValidationError("run_pipeline: empty feature matrix");
  if (survival.durations.size() != n || survival.events.size() != n) {
    throw ValidationError("run_pipeline: survival rows do not match the feature matrix");
  }
  if (static_cast<int>(labels.size()) != n) {
    throw ValidationError("run_pipeline: label count does not match the feature matrix");
  }
  Eigen::VectorXi y(n);
  for (int i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] != 0 && labels[static_cast<std::size_t>(i)] != 1) {
      throw ValidationError("run_pipeline: labels must be 0/1");
    }
    y(i) = labels[static_cast<std::size_t>(i)];
  }
  config.kfre8.validate(features.column_names);

  RunReport report;
  report.config = config;
  const std::vector<std::vector<int>> folds =
      split_folds(n, config.k_folds, derive_seed(config.seed, kFoldSplitStream, 0));

  const int k = config.k_folds;
  report.folds.resize(static_cast<std::size_t>(k));
  std::vector<FoldArtifacts> artifacts(static_cast<std::size_t>(k));

  const int jobs = std::max(1, std::min(config.jobs, k));
  if (jobs == 1) {
    for (int f = 0; f < k; ++f) {
      run_one_fold(f, features, survival, y, config, folds, report.folds[static_cast<std::size_t>(f)],
                   artifacts[static_cast<std::size_t>(f)]);
    }
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          const int f = next.fetch_add(1);
          if (f >= k) return;
          try {
            run_one_fold(f, features, survival, y, config, folds,
                         report.folds[static_cast<std::size_t>(f)],
                         artifacts[static_cast<std::size_t>(f)]);
          } catch (...) {
            errors[static_cast<std::size_t>(f)] = std::current_exception();
          }
        }
      });
    }
    for (auto& worker : workers) worker.join();
    for (int f = 0; f < k; ++f) {
      if (errors[static_cast<std::size_t>(f)]) std::rethrow_exception(errors[static_cast<std::size_t>(f)]);
    }
  }

  // Single-threaded reduction in fold order.
  std::vector<double> aurocs, c_tests;
  for (const FoldReport& fold : report.folds) {
    aurocs.push_back(fold.classifier_auroc);
    c_tests.push_back(fold.c_index_test);
  }
  report.classifier_auroc = aggregate(aurocs);
  report.c_index_test = aggregate(c_tests);

  const std::size_t n_horizons = config.horizons_days.size();
  report.brier.resize(n_horizons);
  report.dynamic_auc.resize(n_horizons);
  for (std::size_t h = 0; h < n_horizons; ++h) {
    std::vector<double> briers, aucs;
    for (const FoldReport& fold : report.folds) {
      briers.push_back(fold.brier[h]);
      const DynamicAucPoint& point = fold.dynamic_auc_points[h];
      if (point.valid) aucs.push_back(point.value);
    }
    report.brier[h] = aggregate(briers);
    report.dynamic_auc[h] = aggregate(aucs);
  }

  report.best_fold = 0;
  for (int f = 1; f < k; ++f) {
    if (report.folds[static_cast<std::size_t>(f)].c_index_test >
        report.folds[static_cast<std::size_t>(report.best_fold)].c_index_test) {
      report.best_fold = f;
    }
  }

  const FoldArtifacts& best = artifacts[static_cast<std::size_t>(report.best_fold)];
  report.cox_summary_table = fold_stage(report.best_fold, "summary", [&] {
    return cox_summary(best.fitted, best.cox_train);
  });
  const SchoenfeldResult schoenfeld = fold_stage(report.best_fold, "schoenfeld", [&] {
    return schoenfeld_residuals(best.fitted, best.cox_train);
  });
  report.schoenfeld.features = schoenfeld.feature_names;
  report.schoenfeld.n_events = static_cast<int>(schoenfeld.event_times.size());
  report.schoenfeld.slopes.assign(schoenfeld.slope.data(),
                                  schoenfeld.slope.data() + schoenfeld.slope.size());
  report.schoenfeld.p_values.assign(schoenfeld.p_values.data(),
                                    schoenfeld.p_values.data() + schoenfeld.p_values.size());
  return report;
}

}  // namespace ckdprog
