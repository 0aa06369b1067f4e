#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "ckdprog/data/survival_data.hpp"

namespace ckdprog {

enum class TieRule { kEfron, kBreslow };

std::string to_string(TieRule rule);
TieRule tie_rule_from_string(const std::string& text);

// Value, gradient, and Hessian of the penalized negative log partial
// likelihood at a given coefficient vector.
struct CoxObjectiveEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// Negative log partial likelihood over observed events
//   -sum_i [ beta^T x_i - log sum_{j in R(t_i)} exp(beta^T x_j) ]
// with the Efron correction applied inside tied event times (Breslow
// available), plus a ridge penalty (penalizer/2)*||beta||^2. Risk sums are
// computed against a shifted exponent so large linear predictors stay finite.
CoxObjectiveEval neg_log_partial_likelihood(const Eigen::VectorXd& beta,
                                            const SurvivalDataset& dataset, double penalizer,
                                            TieRule tie_rule = TieRule::kEfron);

struct CoxConvergence {
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

// Nondecreasing step function t -> H0(t), zero before the first event time.
struct StepFunction {
  std::vector<double> times;
  std::vector<double> values;

  double operator()(double t) const;
};

struct FittedCox {
  Eigen::VectorXd beta;
  std::vector<std::string> feature_names;
  double penalizer = 0.0;
  TieRule tie_rule = TieRule::kEfron;
  StepFunction baseline_cumhaz;
  CoxConvergence convergence;
};

struct CoxFitOptions {
  double penalizer = 0.0007;
  TieRule tie_rule = TieRule::kEfron;
  double tolerance = 1e-7;  // gradient norm at convergence
  int max_iterations = 100;
};

// Newton-Raphson with step halving on the penalized objective. Throws
// ConvergenceError when the tolerance is not reached, and a divergence error
// advising penalizer > 0 when an unpenalized fit runs away (separable data).
FittedCox fit_cox(const SurvivalDataset& dataset, const CoxFitOptions& options = {});

// Breslow estimator H0(t) = sum_{event times <= t} d_i / sum_{R(t_i)} exp(beta^T x_j).
StepFunction baseline_cumulative_hazard(const FittedCox& fitted, const SurvivalDataset& dataset);

// S(t | x) = exp(-H0(t) * exp(beta^T x)).
double predict_survival(const FittedCox& fitted, const Eigen::VectorXd& x, double t);

// Per-row linear predictor beta^T x_i; the risk score fed to the C-index.
Eigen::VectorXd prognostic_index(const FittedCox& fitted, const Eigen::MatrixXd& X);

}  // namespace ckdprog
