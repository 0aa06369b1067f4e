#include "ckdprog/survival/cox.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "ckdprog/common/errors.hpp"

namespace ckdprog {

std::string to_string(TieRule rule) {
  return rule == TieRule::kEfron ? "efron" : "breslow";
}

TieRule tie_rule_from_string(const std::string& text) {
  if (text == "efron") return TieRule::kEfron;
  if (text == "breslow") return TieRule::kBreslow;
  throw ValidationError("unknown tie rule: '" + text + "' (expected 'efron' or 'breslow')");
}

double StepFunction::operator()(double t) const {
  // Largest step time <= t; zero before the first step.
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0.0;
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

namespace {

// Subjects ordered by descending duration so risk sets grow incrementally:
// everyone already absorbed has T >= the current event time.
std::vector<Eigen::Index> descending_order(const Eigen::VectorXd& durations) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(durations.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (durations[a] != durations[b]) return durations[a] > durations[b];
    return a < b;
  });
  return order;
}

}  // namespace

CoxObjectiveEval neg_log_partial_likelihood(const Eigen::VectorXd& beta,
                                            const SurvivalDataset& dataset, double penalizer,
                                            TieRule tie_rule) {
  dataset.validate();
  if (penalizer < 0.0) throw ValidationError("penalizer must be >= 0");
  const Eigen::MatrixXd& X = dataset.features.values;
  if (beta.size() != X.cols())
    throw ValidationError("beta has " + std::to_string(beta.size()) + " coefficients but data has " +
                          std::to_string(X.cols()) + " features");
  if (dataset.events.sum() == 0) throw ValidationError("no events observed; partial likelihood is undefined");

  const Eigen::Index m = X.cols();
  const Eigen::VectorXd eta = X * beta;
  const double shift = eta.maxCoeff();

  CoxObjectiveEval eval;
  eval.value = 0.0;
  eval.gradient = Eigen::VectorXd::Zero(m);
  eval.hessian = Eigen::MatrixXd::Zero(m, m);

  // Risk-set accumulators over exp(eta - shift).
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(m, m);

  const std::vector<Eigen::Index> order = descending_order(dataset.durations);
  std::size_t pos = 0;
  while (pos < order.size()) {
    const double t = dataset.durations[order[pos]];
    // Absorb the whole tie group (events and censored alike) into the risk
    // set before scoring events at t.
    double d0 = 0.0;
    Eigen::VectorXd d1 = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(m, m);
    double event_eta_sum = 0.0;
    Eigen::VectorXd event_x_sum = Eigen::VectorXd::Zero(m);
    int d = 0;
    while (pos < order.size() && dataset.durations[order[pos]] == t) {
      const Eigen::Index i = order[pos];
      const double r = std::exp(eta[i] - shift);
      const Eigen::VectorXd xi = X.row(i).transpose();
      s0 += r;
      s1 += r * xi;
      s2 += r * (xi * xi.transpose());
      if (dataset.events[i] == 1) {
        ++d;
        d0 += r;
        d1 += r * xi;
        d2 += r * (xi * xi.transpose());
        event_eta_sum += eta[i];
        event_x_sum += xi;
      }
      ++pos;
    }
    if (d == 0) continue;

    eval.value -= event_eta_sum;
    eval.gradient -= event_x_sum;
    for (int l = 0; l < d; ++l) {
      // Efron sweeps the tied deaths out of the denominator one fraction at a
      // time; Breslow keeps the full risk set for every tied death.
      const double frac = tie_rule == TieRule::kEfron ? static_cast<double>(l) / d : 0.0;
      const double z0 = s0 - frac * d0;
      const Eigen::VectorXd z1 = s1 - frac * d1;
      const Eigen::MatrixXd z2 = s2 - frac * d2;
      eval.value += shift + std::log(z0);
      const Eigen::VectorXd mean = z1 / z0;
      eval.gradient += mean;
      eval.hessian += z2 / z0 - mean * mean.transpose();
    }
  }

  if (penalizer > 0.0) {
    eval.value += 0.5 * penalizer * beta.squaredNorm();
    eval.gradient += penalizer * beta;
    eval.hessian += penalizer * Eigen::MatrixXd::Identity(m, m);
  }
  return eval;
}

FittedCox fit_cox(const SurvivalDataset& dataset, const CoxFitOptions& options) {
  if (options.max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (options.tolerance <= 0.0) throw ValidationError("tolerance must be > 0");

  const Eigen::Index m = dataset.features.values.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
  CoxObjectiveEval eval =
      neg_log_partial_likelihood(beta, dataset, options.penalizer, options.tie_rule);

  FittedCox fitted;
  fitted.feature_names = dataset.features.column_names;
  fitted.penalizer = options.penalizer;
  fitted.tie_rule = options.tie_rule;

  int iter = 0;
  double grad_norm = eval.gradient.norm();
  while (grad_norm > options.tolerance && iter < options.max_iterations) {
    ++iter;
    Eigen::MatrixXd h = eval.hessian;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      // Flat directions (collinear columns, unpenalized fit); nudge toward
      // gradient descent rather than following a garbage Newton step.
      h += 1e-8 * std::max(1.0, h.diagonal().maxCoeff()) *
           Eigen::MatrixXd::Identity(m, m);
      ldlt.compute(h);
    }
    const Eigen::VectorXd direction = ldlt.solve(-eval.gradient);
    if (!direction.allFinite())
      throw ConvergenceError("Newton direction is not finite; increase the penalizer above 0",
                             grad_norm, iter);

    // Near the optimum the true per-step decrease drops below the rounding
    // noise of the objective sum, so acceptance needs slack of that order or
    // halving stalls forever on noise.
    const double noise = 1e-9 * std::max(1.0, std::abs(eval.value));
    double step = 1.0;
    bool improved = false;
    CoxObjectiveEval trial_eval;
    Eigen::VectorXd trial;
    for (int halving = 0; halving < 40; ++halving) {
      trial = beta + step * direction;
      trial_eval =
          neg_log_partial_likelihood(trial, dataset, options.penalizer, options.tie_rule);
      if (std::isfinite(trial_eval.value) && trial_eval.value <= eval.value + noise) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved)
      throw ConvergenceError("step halving failed to reduce the objective (gradient norm " +
                                 std::to_string(grad_norm) + "); the data may be separable, " +
                                 "try a penalizer > 0",
                             grad_norm, iter);
    beta = trial;
    eval = trial_eval;
    grad_norm = eval.gradient.norm();
    if (beta.lpNorm<Eigen::Infinity>() > 500.0)
      throw ConvergenceError(
          "coefficients diverged (|beta| > 500); the partial likelihood has no finite optimum, "
          "try a penalizer > 0",
          grad_norm, iter);
  }

  if (grad_norm > options.tolerance)
    throw ConvergenceError("Cox fit did not converge in " + std::to_string(iter) +
                               " iterations (gradient norm " + std::to_string(grad_norm) + ")",
                           grad_norm, iter);

  // The unpenalized objective is nonnegative and reaches 0 only in the limit
  // where every event dominates its whole risk set, i.e. a separating
  // covariate. A vanished gradient there is saturation, not an optimum.
  if (options.penalizer == 0.0 && eval.value < 1e-4)
    throw ConvergenceError(
        "partial likelihood saturated; a separating covariate has no finite optimum, "
        "try a penalizer > 0",
        grad_norm, iter);

  fitted.beta = beta;
  fitted.convergence = {iter, grad_norm, true};
  fitted.baseline_cumhaz = baseline_cumulative_hazard(fitted, dataset);
  return fitted;
}

StepFunction baseline_cumulative_hazard(const FittedCox& fitted, const SurvivalDataset& dataset) {
  dataset.validate();
  const Eigen::MatrixXd& X = dataset.features.values;
  if (fitted.beta.size() != X.cols())
    throw ValidationError("fitted model and dataset disagree on feature count");

  const Eigen::VectorXd eta = X * fitted.beta;
  const double shift = eta.size() > 0 ? eta.maxCoeff() : 0.0;

  double s0 = 0.0;
  StepFunction h0;

  const std::vector<Eigen::Index> order = descending_order(dataset.durations);
  std::size_t pos = 0;
  while (pos < order.size()) {
    const double t = dataset.durations[order[pos]];
    int d = 0;
    while (pos < order.size() && dataset.durations[order[pos]] == t) {
      s0 += std::exp(eta[order[pos]] - shift);
      if (dataset.events[order[pos]] == 1) ++d;
      ++pos;
    }
    if (d > 0) {
      // d / (s0 * e^shift): with beta = 0 the factor is exactly 1.0 and the
      // increment is the exact integer ratio d / |risk set|, which keeps the
      // flat baseline bit-identical to the Nelson-Aalen estimator.
      const double increment = static_cast<double>(d) / (s0 * std::exp(shift));
      h0.times.push_back(t);
      h0.values.push_back(increment);
    }
  }
  // Collected in descending time order; reverse and accumulate.
  std::reverse(h0.times.begin(), h0.times.end());
  std::reverse(h0.values.begin(), h0.values.end());
  std::partial_sum(h0.values.begin(), h0.values.end(), h0.values.begin());
  return h0;
}

double predict_survival(const FittedCox& fitted, const Eigen::VectorXd& x, double t) {
  if (x.size() != fitted.beta.size())
    throw ValidationError("covariate vector has " + std::to_string(x.size()) +
                          " entries but the model has " + std::to_string(fitted.beta.size()) +
                          " coefficients");
  if (!(t >= 0.0)) throw ValidationError("survival time must be >= 0");
  if (fitted.baseline_cumhaz.times.empty())
    throw ValidationError("fitted model carries no baseline hazard");
  const double risk = std::exp(fitted.beta.dot(x));
  return std::exp(-fitted.baseline_cumhaz(t) * risk);
}

Eigen::VectorXd prognostic_index(const FittedCox& fitted, const Eigen::MatrixXd& X) {
  if (X.cols() != fitted.beta.size())
    throw ValidationError("matrix has " + std::to_string(X.cols()) +
                          " columns but the model has " + std::to_string(fitted.beta.size()) +
                          " coefficients");
  return X * fitted.beta;
}

}  // namespace ckdprog
