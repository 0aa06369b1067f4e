#include "ckdprog/models/linear.hpp"

#include <cmath>
#include <deque>
#include <vector>

#include "ckdprog/common/errors.hpp"

namespace ckdprog {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double softplus(double u) {
  // log(1 + exp(u)) without overflow.
  return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

// Objective over theta = [w; b]; only w is penalized.
double objective(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, double c,
                 const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
  const Eigen::Index m = X.cols();
  const Eigen::VectorXd w = theta.head(m);
  const double b = theta[m];
  const Eigen::VectorXd z = (X * w).array() + b;

  double loss = 0.5 * w.squaredNorm();
  Eigen::VectorXd residual(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double sign = y[i] == 1 ? 1.0 : -1.0;
    loss += c * softplus(-sign * z[i]);
    residual[i] = sigmoid(z[i]) - static_cast<double>(y[i]);
  }
  grad.resize(m + 1);
  grad.head(m) = w + c * (X.transpose() * residual);
  grad[m] = c * residual.sum();
  return loss;
}

}  // namespace

LinearModel train_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                           const LogisticConfig& config) {
  if (X.rows() == 0) throw ValidationError("cannot train on an empty matrix");
  if (y.size() != X.rows()) throw ValidationError("label count does not match row count");
  if (!X.allFinite()) throw ValidationError("feature matrix contains non-finite values");
  if (config.c <= 0.0) throw ValidationError("C must be > 0");
  int positives = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw ValidationError("labels must be 0 or 1");
    positives += y[i];
  }
  if (positives == 0 || positives == y.size())
    throw ValidationError("labels contain a single class; log odds are undefined");

  const Eigen::Index m = X.cols();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(m + 1);
  Eigen::VectorXd grad;
  double f = objective(X, y, config.c, theta, grad);

  // L-BFGS two-loop recursion, memory 10, with backtracking Armijo search.
  constexpr int kMemory = 10;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() <= config.tolerance) break;

    Eigen::VectorXd q = grad;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const Eigen::VectorXd& s = s_hist.back();
      const Eigen::VectorXd& yv = y_hist.back();
      q *= s.dot(yv) / yv.squaredNorm();
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd direction = -q;
    double descent = grad.dot(direction);
    if (descent >= 0.0) {
      direction = -grad;
      descent = -grad.squaredNorm();
    }

    double step = 1.0;
    Eigen::VectorXd theta_new;
    Eigen::VectorXd grad_new;
    double f_new = f;
    bool accepted = false;
    for (int bt = 0; bt < 50; ++bt) {
      theta_new = theta + step * direction;
      f_new = objective(X, y, config.c, theta_new, grad_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * descent) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no further progress possible in float precision

    const Eigen::VectorXd s = theta_new - theta;
    const Eigen::VectorXd yv = grad_new - grad;
    const double sy = s.dot(yv);
    if (sy > 1e-12) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    theta = theta_new;
    grad = grad_new;
    f = f_new;
  }

  LinearModel model;
  model.weights = theta.head(m);
  model.intercept = theta[m];
  return model;
}

Eigen::VectorXd linear_predict_margin(const LinearModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.weights.size())
    throw ValidationError("matrix has " + std::to_string(X.cols()) +
                          " columns but the model expects " + std::to_string(model.weights.size()));
  return (X * model.weights).array() + model.intercept;
}

Eigen::VectorXd linear_predict_proba(const LinearModel& model, const Eigen::MatrixXd& X) {
  Eigen::VectorXd margin = linear_predict_margin(model, X);
  for (Eigen::Index i = 0; i < margin.size(); ++i) margin[i] = sigmoid(margin[i]);
  return margin;
}

}  // namespace ckdprog
