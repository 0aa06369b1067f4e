// Acceptance harness: one check per shipped guarantee, one PASS/FAIL line
// each, exit code equal to the number of failures.
#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/rng.hpp"
#include "ckdprog/data/feature_matrix.hpp"
#include "ckdprog/data/folds.hpp"
#include "ckdprog/data/survival_data.hpp"
#include "ckdprog/data/synthetic.hpp"
#include "ckdprog/explain/exact.hpp"
#include "ckdprog/explain/kernel_shap.hpp"
#include "ckdprog/explain/linear_shap.hpp"
#include "ckdprog/explain/tree_shap.hpp"
#include "ckdprog/metrics/metrics.hpp"
#include "ckdprog/models/linear.hpp"
#include "ckdprog/models/mlp.hpp"
#include "ckdprog/models/model.hpp"
#include "ckdprog/pipeline/config.hpp"
#include "ckdprog/pipeline/run.hpp"
#include "ckdprog/pipeline/select.hpp"
#include "ckdprog/survival/cox.hpp"

namespace {

using namespace ckdprog;
using Clock = std::chrono::steady_clock;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

std::string fmt(double value) {
  std::ostringstream out;
  out.precision(10);
  out << value;
  return out.str();
}

// ---- shared construction helpers ------------------------------------------

Background random_background(Rng& rng, int k, int n_features) {
  Background background;
  background.rows.resize(k, n_features);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < n_features; ++j) background.rows(i, j) = rng.normal();
  }
  return background;
}

Eigen::RowVectorXd random_row(Rng& rng, int n_features) {
  Eigen::RowVectorXd row(n_features);
  for (int j = 0; j < n_features; ++j) row(j) = rng.normal();
  return row;
}

// Training matrix plus labels with both classes guaranteed.
std::pair<Eigen::MatrixXd, Eigen::VectorXi> random_training(Rng& rng, int rows, int n_features) {
  Eigen::MatrixXd X(rows, n_features);
  Eigen::VectorXi y(rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < n_features; ++j) X(i, j) = rng.normal();
    y(i) = rng.bernoulli(0.5) ? 1 : 0;
  }
  y(0) = 0;
  y(1) = 1;
  return {X, y};
}

SurvivalDataset make_survival(const Eigen::MatrixXd& X, const Eigen::VectorXd& durations,
                              const Eigen::VectorXi& events) {
  SurvivalDataset data;
  data.durations = durations;
  data.events = events;
  data.features.values = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    data.features.column_names.push_back("x" + std::to_string(j));
    data.features.column_kinds.push_back(ColumnKind::kLabAggregate);
  }
  return data;
}

SurvivalDataset random_survival(Rng& rng, int n, int d, bool with_ties) {
  Eigen::MatrixXd X(n, d);
  Eigen::VectorXd durations(n);
  Eigen::VectorXi events(n);
  while (true) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = 0.8 * rng.normal();
      durations(i) = with_ties ? static_cast<double>(rng.uniform_int(1, 6))
                               : -std::log(rng.uniform()) * 100.0 + 1.0;
      events(i) = rng.bernoulli(0.7) ? 1 : 0;
    }
    if (events.sum() >= 2) break;
  }
  return make_survival(X, durations, events);
}

double model_margin_at(const AnyModel& model, const Eigen::RowVectorXd& row) {
  Eigen::MatrixXd X(1, row.size());
  X.row(0) = row;
  return predict_margin(model, X)(0);
}

double model_proba_at(const AnyModel& model, const Eigen::RowVectorXd& row) {
  Eigen::MatrixXd X(1, row.size());
  X.row(0) = row;
  return predict_proba(model, X)(0);
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// ---- CLI driving (criterion 11) -------------------------------------------

std::filesystem::path scratch_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("ckdprog_acceptance_" + std::to_string(static_cast<long>(::getpid())));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(static_cast<bool>(in), "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  check(static_cast<bool>(out), "cannot write " + path);
}

int run_cli(const std::string& args, const std::string& stdout_path) {
  const std::string command =
      std::string("\"") + CKDPROG_CLI_PATH + "\" " + args + " > \"" + stdout_path + "\" 2> /dev/null";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---- criteria --------------------------------------------------------------

// 1. Closed-form and tree explainers agree with exhaustive enumeration, and
//    the kernel explainer becomes exact once every coalition is enumerated.
void criterion_shapley_oracle() {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const int n_features = 2 + trial % 7;  // 2..8
    const int k = 1 + trial % 8;
    const Background background = random_background(rng, k, n_features);
    const Eigen::RowVectorXd x = random_row(rng, n_features);

    Eigen::VectorXd specialized;
    ModelFn fn;
    if (trial % 3 == 0) {
      LinearModel model;
      model.weights = random_row(rng, n_features).transpose();
      model.intercept = rng.normal();
      specialized = linear_shap(model, x, background);
      fn = [model](const Eigen::RowVectorXd& row) {
        return model.weights.dot(row.transpose()) + model.intercept;
      };
    } else {
      auto [X, y] = random_training(rng, 40, n_features);
      TrainConfig config;
      if (trial % 3 == 1) {
        config = default_train_config(Family::kDt);
        config.tree = {3, 2, 1};
      } else if ((trial / 3) % 2 == 0) {
        config = default_train_config(Family::kRf);
        config.forest.n_estimators = 3;
        config.forest.max_depth = 3;
        config.forest.min_samples_leaf = 2;
      } else {
        config = default_train_config(Family::kGbt);
        config.boosted.n_estimators = 4;
        config.boosted.max_depth = 2;
        config.boosted.learning_rate = 0.3;
        config.boosted.gamma = 0.0;
        config.boosted.min_child_weight = 0.5;
        config.boosted.subsample = 1.0;
        config.boosted.colsample_bytree = 1.0;
        config.boosted.colsample_bylevel = 1.0;
      }
      config.seed = 1000 + static_cast<std::uint64_t>(trial);
      const AnyModel model = train_model(X, y, config);
      const bool margin_space = margin_is_log_odds(model_family(model));
      if (const auto* tree = std::get_if<TreeModel>(&model)) {
        specialized = tree_shap(*tree, x, background);
      } else if (const auto* forest = std::get_if<ForestModel>(&model)) {
        specialized = tree_shap(*forest, x, background);
      } else {
        specialized = tree_shap(std::get<BoostedModel>(model), x, background);
      }
      fn = [model, margin_space](const Eigen::RowVectorXd& row) {
        return margin_space ? model_margin_at(model, row) : model_proba_at(model, row);
      };
    }

    const Eigen::VectorXd exact = exact_shapley(fn, x, background);
    const double specialized_gap = inf_norm(specialized - exact);
    check(specialized_gap <= 1e-8,
          "trial " + std::to_string(trial) + ": specialized explainer off by " +
              fmt(specialized_gap));

    const Eigen::VectorXd kernel =
        kernel_shap(fn, x, background, 1 << n_features, 7000 + static_cast<std::uint64_t>(trial));
    const double kernel_gap = inf_norm(kernel - exact);
    check(kernel_gap <= 1e-6,
          "trial " + std::to_string(trial) + ": full-enumeration kernel off by " + fmt(kernel_gap));
  }
}

// 2. Every explainer output in a 1000-case fuzz satisfies efficiency, and a
//    provably ignored feature receives zero attribution wherever the
//    explainer is exact.
void criterion_shapley_properties() {
  Rng rng(202);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n_features = 3 + trial % 4;  // 3..6
    const int k = 1 + trial % 4;
    const Background background = random_background(rng, k, n_features);
    const Eigen::RowVectorXd x = random_row(rng, n_features);
    const int mode = trial % 5;

    Eigen::VectorXd phi;
    double fx = 0.0;
    double base = 0.0;
    double efficiency_tol = 1e-8;
    bool check_null = true;
    double null_tol = 1e-12;

    if (mode == 0) {
      // Nonlinear function that never reads feature 0.
      const Eigen::RowVectorXd w = random_row(rng, n_features);
      const ModelFn fn = [w](const Eigen::RowVectorXd& row) {
        double z = 0.0;
        for (Eigen::Index j = 1; j < row.size(); ++j) z += w(j) * row(j);
        return std::sin(z) + 0.25 * z * z;
      };
      phi = exact_shapley(fn, x, background);
      fx = fn(x);
      base = expected_value(fn, background);
    } else if (mode == 1) {
      LinearModel model;
      model.weights = random_row(rng, n_features).transpose();
      model.weights(0) = 0.0;
      model.intercept = rng.normal();
      phi = linear_shap(model, x, background);
      fx = model.weights.dot(x.transpose()) + model.intercept;
      base = 0.0;
      for (Eigen::Index i = 0; i < background.rows.rows(); ++i) {
        base += model.weights.dot(background.rows.row(i).transpose()) + model.intercept;
      }
      base /= static_cast<double>(background.rows.rows());
    } else if (mode == 2 || mode == 3) {
      // Constant column 0 in training: no split can use it, so the walker
      // must assign it exactly zero.
      auto [X, y] = random_training(rng, 30, n_features);
      X.col(0).setZero();
      TrainConfig config;
      if (mode == 2) {
        config = default_train_config(Family::kDt);
        config.tree = {3, 2, 1};
      } else {
        config = default_train_config(Family::kGbt);
        config.boosted.n_estimators = 4;
        config.boosted.max_depth = 2;
        config.boosted.learning_rate = 0.3;
        config.boosted.gamma = 0.0;
        config.boosted.min_child_weight = 0.5;
        config.boosted.subsample = 1.0;
        config.boosted.colsample_bytree = 1.0;
        config.boosted.colsample_bylevel = 1.0;
      }
      config.seed = 2000 + static_cast<std::uint64_t>(trial);
      const AnyModel model = train_model(X, y, config);
      if (mode == 2) {
        phi = tree_shap(std::get<TreeModel>(model), x, background);
        fx = model_proba_at(model, x);
        double total = 0.0;
        for (Eigen::Index i = 0; i < background.rows.rows(); ++i) {
          total += model_proba_at(model, background.rows.row(i));
        }
        base = total / static_cast<double>(background.rows.rows());
      } else {
        phi = tree_shap(std::get<BoostedModel>(model), x, background);
        fx = model_margin_at(model, x);
        double total = 0.0;
        for (Eigen::Index i = 0; i < background.rows.rows(); ++i) {
          total += model_margin_at(model, background.rows.row(i));
        }
        base = total / static_cast<double>(background.rows.rows());
      }
    } else {
      // Kernel explainer; sampled on odd trials, fully enumerated on even.
      const Eigen::RowVectorXd w = random_row(rng, n_features);
      const ModelFn fn = [w](const Eigen::RowVectorXd& row) {
        double z = 0.0;
        for (Eigen::Index j = 1; j < row.size(); ++j) z += w(j) * row(j);
        return sigmoid(z);
      };
      const bool full = trial % 2 == 0;
      const int budget = full ? (1 << n_features) : n_features + 2 + trial % n_features;
      phi = kernel_shap(fn, x, background, budget, 3000 + static_cast<std::uint64_t>(trial));
      fx = fn(x);
      base = expected_value(fn, background);
      efficiency_tol = 1e-6;
      check_null = full;  // sampled regressions only guarantee efficiency
      null_tol = 1e-6;
    }

    const double gap = std::abs(phi.sum() - (fx - base));
    check(gap <= efficiency_tol,
          "trial " + std::to_string(trial) + ": efficiency gap " + fmt(gap));
    if (check_null) {
      check(std::abs(phi(0)) <= null_tol,
            "trial " + std::to_string(trial) + ": null feature attributed " + fmt(phi(0)));
    }
  }
}

// 3. Analytic gradient and Hessian of the penalized objective match central
//    finite differences on random datasets under both tie rules.
void criterion_cox_derivatives() {
  Rng rng(303);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 8 + static_cast<int>(rng.uniform_int(0, 22));
    const int d = 1 + trial % 4;
    const SurvivalDataset data = random_survival(rng, n, d, trial % 2 == 0);
    const double penalizer = (trial % 3 == 0) ? 0.0 : 0.05;
    const TieRule rule = (trial % 2 == 0) ? TieRule::kEfron : TieRule::kBreslow;
    Eigen::VectorXd beta(d);
    for (int j = 0; j < d; ++j) beta(j) = 0.6 * rng.normal();

    const CoxObjectiveEval eval = neg_log_partial_likelihood(beta, data, penalizer, rule);
    Eigen::VectorXd grad_fd(d);
    Eigen::MatrixXd hess_fd(d, d);
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd up = beta, down = beta;
      up(j) += h;
      down(j) -= h;
      const CoxObjectiveEval e_up = neg_log_partial_likelihood(up, data, penalizer, rule);
      const CoxObjectiveEval e_down = neg_log_partial_likelihood(down, data, penalizer, rule);
      grad_fd(j) = (e_up.value - e_down.value) / (2.0 * h);
      hess_fd.col(j) = (e_up.gradient - e_down.gradient) / (2.0 * h);
    }

    const double grad_err =
        inf_norm(eval.gradient - grad_fd) / std::max(1.0, inf_norm(eval.gradient));
    check(grad_err <= 1e-5, "trial " + std::to_string(trial) + ": gradient rel err " + fmt(grad_err));
    const double hess_err = (eval.hessian - hess_fd).cwiseAbs().maxCoeff() /
                            std::max(1.0, eval.hessian.cwiseAbs().maxCoeff());
    check(hess_err <= 1e-5, "trial " + std::to_string(trial) + ": hessian rel err " + fmt(hess_err));
  }
}

// 4. The fitter recovers the generating coefficients on a large synthetic
//    cohort, including the zero components.
void criterion_cox_recovery() {
  SyntheticConfig config;
  config.n_subjects = 2000;
  config.n_signal_features = 4;
  config.true_beta = (Eigen::VectorXd(4) << 1.0, -0.5, 0.0, 0.0).finished();
  config.censor_rate_target = 0.3;
  config.seed = 404;
  const SyntheticCohort cohort = generate_synthetic_cohort(config);

  CoxFitOptions options;
  options.penalizer = 0.0007;
  const FittedCox fitted = fit_cox(cohort.survival, options);
  check(fitted.convergence.converged, "fit did not converge");
  const double gap = inf_norm(fitted.beta - config.true_beta);
  check(gap <= 0.1, "recovery gap " + fmt(gap));
  check(std::abs(fitted.beta(2)) <= 0.1, "null coefficient 2 estimated " + fmt(fitted.beta(2)));
  check(std::abs(fitted.beta(3)) <= 0.1, "null coefficient 3 estimated " + fmt(fitted.beta(3)));
}

// 5. With no coefficient contrast the Breslow baseline reduces to the
//    Nelson-Aalen estimator, knot for knot.
void criterion_baseline_nelson_aalen() {
  Rng rng(505);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 20 + static_cast<int>(rng.uniform_int(0, 30));
    Eigen::MatrixXd X = Eigen::MatrixXd::Constant(n, 1, 0.8);  // zero contrast
    Eigen::VectorXd durations(n);
    Eigen::VectorXi events(n);
    do {
      for (int i = 0; i < n; ++i) {
        durations(i) = static_cast<double>(rng.uniform_int(1, 8));  // heavy ties
        events(i) = rng.bernoulli(0.6) ? 1 : 0;
      }
    } while (events.sum() < 2);
    const SurvivalDataset data = make_survival(X, durations, events);

    CoxFitOptions options;
    options.penalizer = 0.5;
    const FittedCox fitted = fit_cox(data, options);
    check(fitted.beta(0) == 0.0, "contrast-free fit moved beta to " + fmt(fitted.beta(0)));

    // Nelson-Aalen oracle: events and at-risk counts per distinct event time.
    std::map<double, int> event_counts;
    for (int i = 0; i < n; ++i) {
      if (events(i) == 1) ++event_counts[durations(i)];
    }
    std::vector<double> times;
    std::vector<double> values;
    double h = 0.0;
    for (const auto& [t, d] : event_counts) {
      int at_risk = 0;
      for (int i = 0; i < n; ++i) {
        if (durations(i) >= t) ++at_risk;
      }
      h += static_cast<double>(d) / static_cast<double>(at_risk);
      times.push_back(t);
      values.push_back(h);
    }
    check(fitted.baseline_cumhaz.times == times,
          "trial " + std::to_string(trial) + ": baseline knots differ");
    check(fitted.baseline_cumhaz.values == values,
          "trial " + std::to_string(trial) + ": baseline values differ");
  }
}

// 6. The tie-aware concordance index equals explicit pair enumeration.
void criterion_c_index_brute_force() {
  Rng rng(606);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 48));
    Eigen::VectorXd risk(n), durations(n);
    Eigen::VectorXi events(n);
    for (int i = 0; i < n; ++i) {
      risk(i) = static_cast<double>(rng.uniform_int(0, 5));  // frequent score ties
      durations(i) = static_cast<double>(rng.uniform_int(1, 8));
      events(i) = rng.bernoulli(0.6) ? 1 : 0;
    }
    // Force one comparable pair so the metric is defined.
    durations(0) = 1.0;
    events(0) = 1;
    durations(n - 1) = 9.0;

    double concordant = 0.0;
    double comparable = 0.0;
    for (int i = 0; i < n; ++i) {
      if (events(i) != 1) continue;
      for (int j = 0; j < n; ++j) {
        if (durations(i) >= durations(j)) continue;
        comparable += 1.0;
        if (risk(i) > risk(j)) {
          concordant += 1.0;
        } else if (risk(i) == risk(j)) {
          concordant += 0.5;
        }
      }
    }
    const double expected = concordant / comparable;
    const double actual = concordance_index(risk, durations, events);
    check(actual == expected, "trial " + std::to_string(trial) + ": c-index " + fmt(actual) +
                                  " vs enumerated " + fmt(expected));
  }
}

// 7. Fixed points of the evaluation metrics.
void criterion_metric_fixed_points() {
  {
    Eigen::VectorXd scores(6);
    scores << 0.9, 0.8, 0.7, 0.3, 0.2, 0.1;
    Eigen::VectorXi labels(6);
    labels << 1, 1, 1, 0, 0, 0;
    check(auroc(scores, labels) == 1.0, "perfect separation auroc");
  }
  {
    Eigen::VectorXd scores = Eigen::VectorXd::Constant(8, 0.7);
    Eigen::VectorXi labels(8);
    for (int i = 0; i < 8; ++i) labels(i) = i % 2;
    check(auroc(scores, labels) == 0.5, "all-tied auroc");

    Eigen::VectorXd durations(8);
    durations << 1, 2, 3, 4, 5, 6, 7, 8;
    Eigen::VectorXi events = Eigen::VectorXi::Ones(8);
    check(concordance_index(scores, durations, events) == 0.5, "all-tied c-index");

    const auto points = dynamic_auc(scores, durations, events, {4.5});
    check(points.size() == 1 && points[0].valid, "dynamic auc point invalid");
    check(points[0].value == 0.5, "all-tied dynamic auc");
  }
  {
    Eigen::VectorXd durations(4);
    durations << 2, 4, 6, 8;
    Eigen::VectorXi events = Eigen::VectorXi::Ones(4);
    const SurvivalDataset data = make_survival(Eigen::MatrixXd::Zero(4, 1), durations, events);
    const SurvivalFn flat = [](Eigen::Index, double) { return 0.5; };
    check(brier_score(flat, data, 5.0, BrierMode::kLiteral) == 0.25, "flat-prediction brier");
  }
  {
    Eigen::VectorXd durations(4);
    durations << 10, 10, 2, 3;
    Eigen::VectorXi events(4);
    events << 0, 0, 1, 1;
    const SurvivalDataset data = make_survival(Eigen::MatrixXd::Zero(4, 1), durations, events);
    const std::vector<double> survival = {0.9, 0.8, 0.3, 0.1};
    const SurvivalFn fn = [&survival](Eigen::Index row, double) {
      return survival[static_cast<std::size_t>(row)];
    };
    const double value = brier_score(fn, data, 5.0, BrierMode::kLiteral);
    check(std::abs(value - 0.0375) <= 1e-15, "hand brier instance gave " + fmt(value));
  }
}

// 8. Network gradients match finite differences with dropout off, and a
//    zero-weight residual block is an exact identity.
void criterion_mlp_gradient() {
  Rng rng(808);
  const auto gradient_check = [&rng](const MlpConfig& config) {
    MlpModel model = make_mlp(4, config, 99);
    Eigen::MatrixXd X(6, 4);
    Eigen::VectorXi y(6);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 4; ++j) X(i, j) = rng.normal();
      y(i) = i % 2;
    }
    Eigen::VectorXd gradient;
    mlp_loss_and_gradient(model, X, y, 0.01, gradient);

    Eigen::VectorXd theta = get_parameters(model);
    Eigen::VectorXd fd(theta.size());
    const double h = 1e-6;
    Eigen::VectorXd scratch;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Eigen::VectorXd up = theta, down = theta;
      up(i) += h;
      down(i) -= h;
      set_parameters(model, up);
      const double loss_up = mlp_loss_and_gradient(model, X, y, 0.01, scratch);
      set_parameters(model, down);
      const double loss_down = mlp_loss_and_gradient(model, X, y, 0.01, scratch);
      fd(i) = (loss_up - loss_down) / (2.0 * h);
    }
    set_parameters(model, theta);
    return inf_norm(gradient - fd) / std::max(1.0, inf_norm(gradient));
  };

  MlpConfig plain;
  plain.arch = MlpArch::kPlain;
  plain.hidden_dims = {5, 4, 3};
  plain.dropout_rate = 0.0;
  const double plain_err = gradient_check(plain);
  check(plain_err <= 1e-4, "plain-arch gradient rel err " + fmt(plain_err));

  MlpConfig residual;
  residual.arch = MlpArch::kResidual;
  residual.n_blocks = 2;
  residual.hidden_dim = 5;
  const double residual_err = gradient_check(residual);
  check(residual_err <= 1e-4, "residual-arch gradient rel err " + fmt(residual_err));

  MlpModel identity = make_mlp(4, residual, 100);
  set_parameters(identity, Eigen::VectorXd::Zero(get_parameters(identity).size()));
  Eigen::MatrixXd H(3, 5);
  H << 1.5, -2.0, 0.25, 3.0, -0.5, 0.75, 1.25, -1.0, 2.5, 0.1, -3.5, 0.6, 1.1, -0.9, 2.2;
  for (int block = 0; block < 2; ++block) {
    const Eigen::MatrixXd out = residual_block_forward(identity, block, H);
    check((out.array() == H.array()).all(),
          "zero-weight block " + std::to_string(block) + " is not an identity");
  }
}

// 9. When non-clinical features drive the hazard, augmented pipelines beat
//    the clinical-only baseline by a clear margin for the boosted and
//    logistic families.
void criterion_augmented_beats_baseline() {
  SyntheticConfig cohort_config;
  cohort_config.n_subjects = 1000;
  cohort_config.n_signal_features = 5;
  cohort_config.true_beta = (Eigen::VectorXd(5) << 1.2, -1.0, 0.9, -0.8, 0.7).finished();
  cohort_config.n_noise_features = 8;
  cohort_config.with_kfre_columns = true;
  cohort_config.censor_rate_target = 0.3;
  cohort_config.seed = 909;
  const SyntheticCohort cohort = generate_synthetic_cohort(cohort_config);

  PipelineConfig config;
  config.k_folds = 5;
  config.top_j = 10;
  config.seed = 17;
  config.horizons_days = {180.0, 360.0};
  config.explain_samples = 32;
  config.background_rows = 50;
  config.hyperparameters.boosted.n_estimators = 40;
  config.hyperparameters.boosted.max_depth = 6;

  const auto mean_c_index = [&](Family family) {
    PipelineConfig run_config = config;
    run_config.family = family;
    const RunReport report =
        run_pipeline(cohort.features, cohort.survival, cohort.progressed, run_config);
    return report.c_index_test.mean;
  };

  const double baseline = mean_c_index(Family::kBaseline);
  const double lr = mean_c_index(Family::kLr);
  const double gbt = mean_c_index(Family::kGbt);
  check(lr >= baseline + 0.02, "lr c-index " + fmt(lr) + " vs baseline " + fmt(baseline));
  check(gbt >= baseline + 0.02, "gbt c-index " + fmt(gbt) + " vs baseline " + fmt(baseline));
}

// 10. Selection always returns between max(j, 8) and j + 8 names, always
//     containing the full clinical set, and the shipped default keeps j=40.
void criterion_selection_contract() {
  check(PipelineConfig{}.top_j == 40, "default top-j changed");
  Rng rng(1010);
  const Kfre8Spec kfre8 = Kfre8Spec::synthetic_default();
  const auto kfre_names = kfre8.column_list();
  for (int trial = 0; trial < 200; ++trial) {
    const int ranked = 8 + static_cast<int>(rng.uniform_int(0, 52));
    FeatureRanking ranking;
    int kfre_used = 0;
    for (int i = 0; i < ranked; ++i) {
      std::string name = "f" + std::to_string(i);
      if (kfre_used < 8 && rng.bernoulli(0.15)) {
        name = kfre_names[static_cast<std::size_t>(kfre_used++)];
      }
      ranking.push_back({name, static_cast<double>(ranked - i)});
    }
    const int j = static_cast<int>(rng.uniform_int(0, ranked));
    const SelectionResult result = select_features(ranking, j, kfre8);
    const int size = static_cast<int>(result.features.size());
    check(size >= std::max(j, 8), "trial " + std::to_string(trial) + ": |F| " +
                                      std::to_string(size) + " below max(j,8) with j=" +
                                      std::to_string(j));
    check(size <= j + 8, "trial " + std::to_string(trial) + ": |F| " + std::to_string(size) +
                             " above j+8 with j=" + std::to_string(j));
    const std::set<std::string> selected(result.features.begin(), result.features.end());
    check(selected.size() == result.features.size(),
          "trial " + std::to_string(trial) + ": duplicate selections");
    for (const auto& name : kfre_names) {
      check(selected.count(name) == 1,
            "trial " + std::to_string(trial) + ": clinical column " + name + " missing");
    }
  }
}

// 11. Two CLI runs with the same config and seed produce byte-identical
//     report files.
void criterion_run_determinism() {
  PipelineConfig config;
  config.family = Family::kDt;
  config.top_j = 5;
  config.k_folds = 3;
  config.seed = 11;
  config.horizons_days = {120.0, 240.0};
  config.explain_samples = 24;
  config.background_rows = 40;
  config.hyperparameters.tree = {4, 4, 3};
  config.inputs.use_synthetic = true;
  config.inputs.synthetic.n_subjects = 200;
  config.inputs.synthetic.n_signal_features = 3;
  config.inputs.synthetic.true_beta = (Eigen::VectorXd(3) << 1.0, -0.8, 0.6).finished();
  config.inputs.synthetic.n_noise_features = 4;
  config.inputs.synthetic.with_kfre_columns = true;
  config.inputs.synthetic.seed = 11;

  const std::string config_path = (scratch_dir() / "run_config.json").string();
  write_file(config_path, pipeline_config_to_json(config));
  const std::string dir_a = (scratch_dir() / "run_a").string();
  const std::string dir_b = (scratch_dir() / "run_b").string();
  const std::string manifest_a = (scratch_dir() / "manifest_a.json").string();
  const std::string manifest_b = (scratch_dir() / "manifest_b.json").string();

  check(run_cli("run --config \"" + config_path + "\" --out \"" + dir_a + "\"", manifest_a) == 0,
        "first run exited nonzero");
  check(run_cli("run --config \"" + config_path + "\" --out \"" + dir_b + "\"", manifest_b) == 0,
        "second run exited nonzero");

  const nlohmann::json parsed_a = nlohmann::json::parse(read_file(manifest_a));
  const nlohmann::json parsed_b = nlohmann::json::parse(read_file(manifest_b));
  check(parsed_a.at("files").size() == 6, "manifest does not list six files");
  check(parsed_a.at("files") == parsed_b.at("files"), "manifest hashes differ between runs");
  for (const auto& entry : parsed_a.at("files")) {
    const std::string name = entry.at("filename").get<std::string>();
    check(read_file((std::filesystem::path(dir_a) / name).string()) ==
              read_file((std::filesystem::path(dir_b) / name).string()),
          name + " differs between identical runs");
  }
}

// 12. The coefficient norm never grows as the ridge penalty grows.
void criterion_penalty_monotonicity() {
  SyntheticConfig config;
  config.n_subjects = 200;
  config.n_signal_features = 3;
  config.true_beta = (Eigen::VectorXd(3) << 1.0, -0.8, 0.6).finished();
  config.censor_rate_target = 0.3;
  config.seed = 1212;
  const SyntheticCohort cohort = generate_synthetic_cohort(config);

  const std::vector<double> ladder = {0.0, 0.0007, 0.01, 0.1, 1.0};
  double previous = std::numeric_limits<double>::infinity();
  for (const double penalizer : ladder) {
    CoxFitOptions options;
    options.penalizer = penalizer;
    const FittedCox fitted = fit_cox(cohort.survival, options);
    const double norm = fitted.beta.norm();
    check(norm <= previous + 1e-9, "norm rose from " + fmt(previous) + " to " + fmt(norm) +
                                       " at penalizer " + fmt(penalizer));
    previous = norm;
  }
}

// 13. Scaling a held-out row by 1e6 cannot move any train-fold artifact.
void criterion_leakage() {
  SyntheticConfig cohort_config;
  cohort_config.n_subjects = 160;
  cohort_config.n_signal_features = 3;
  cohort_config.true_beta = (Eigen::VectorXd(3) << 1.0, -0.8, 0.6).finished();
  cohort_config.n_noise_features = 4;
  cohort_config.with_kfre_columns = true;
  cohort_config.seed = 1313;
  const SyntheticCohort cohort = generate_synthetic_cohort(cohort_config);

  PipelineConfig config;
  config.family = Family::kLr;
  config.top_j = 4;
  config.k_folds = 3;
  config.seed = 7;
  config.horizons_days = {120.0};
  config.explain_samples = 24;
  config.background_rows = 40;

  const RunReport clean =
      run_pipeline(cohort.features, cohort.survival, cohort.progressed, config);

  const auto folds = split_folds(static_cast<int>(cohort.features.rows()), config.k_folds,
                                 derive_seed(config.seed, kFoldSplitStream, 0));
  const int held_out_row = folds[0][0];
  FeatureMatrix poisoned = cohort.features;
  poisoned.values.row(held_out_row) *= 1e6;
  SurvivalDataset poisoned_survival = cohort.survival;
  poisoned_survival.features = poisoned;
  const RunReport dirty =
      run_pipeline(poisoned, poisoned_survival, cohort.progressed, config);

  const FoldReport& a = clean.folds[0];
  const FoldReport& b = dirty.folds[0];
  check(a.transform.medians == b.transform.medians, "imputation medians moved");
  check(a.transform.means == b.transform.means, "imputation means moved");
  check(a.transform.stds == b.transform.stds, "imputation sds moved");
  check(a.ranking.size() == b.ranking.size(), "ranking length changed");
  for (std::size_t i = 0; i < a.ranking.size(); ++i) {
    check(a.ranking[i].name == b.ranking[i].name, "ranking order changed");
    check(a.ranking[i].mean_abs_attribution == b.ranking[i].mean_abs_attribution,
          "ranking values changed");
  }
  check(a.selected_features == b.selected_features, "selection changed");
  check(a.cox_beta.size() == b.cox_beta.size() && (a.cox_beta.array() == b.cox_beta.array()).all(),
        "cox coefficients changed");
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "shapley explainers match exhaustive enumeration", 120.0, criterion_shapley_oracle},
      {2, "shapley efficiency and null-player fuzz", 0.0, criterion_shapley_properties},
      {3, "cox derivatives match finite differences", 30.0, criterion_cox_derivatives},
      {4, "cox parameter recovery on a synthetic cohort", 30.0, criterion_cox_recovery},
      {5, "flat baseline equals nelson-aalen exactly", 0.0, criterion_baseline_nelson_aalen},
      {6, "c-index equals brute-force pair enumeration", 0.0, criterion_c_index_brute_force},
      {7, "metric fixed points", 0.0, criterion_metric_fixed_points},
      {8, "mlp gradients and residual identity", 0.0, criterion_mlp_gradient},
      {9, "augmented pipelines beat the clinical baseline", 300.0,
       criterion_augmented_beats_baseline},
      {10, "selection cardinality and clinical-set contract", 0.0, criterion_selection_contract},
      {11, "end-to-end runs are byte-identical", 0.0, criterion_run_determinism},
      {12, "coefficient norm nonincreasing in the penalizer", 0.0,
       criterion_penalty_monotonicity},
      {13, "held-out rows cannot leak into training artifacts", 0.0, criterion_leakage},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = Clock::now();
    std::string error;
    try {
      criterion.body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (error.empty() && criterion.budget_seconds > 0.0 && seconds > criterion.budget_seconds) {
      error = "exceeded " + fmt(criterion.budget_seconds) + "s budget";
    }
    if (error.empty()) {
      std::printf("PASS  %2d  %s  (%.2fs)\n", criterion.id, criterion.name, seconds);
    } else {
      ++failures;
      std::printf("FAIL  %2d  %s  (%.2fs): %s\n", criterion.id, criterion.name, seconds,
                  error.c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%d/13 criteria passed\n", 13 - failures);
  return failures;
}
