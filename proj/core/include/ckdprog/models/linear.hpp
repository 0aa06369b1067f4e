#pragma once

#include <Eigen/Core>

namespace ckdprog {

// Logistic regression: P(y=1|x) = sigmoid(w.x + b).
struct LinearModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
};

struct LogisticConfig {
  double c = 0.095;  // inverse regularization strength on the data term
  int max_iterations = 1000;
  double tolerance = 1e-8;  // gradient infinity norm at convergence
};

// Minimizes (1/2)||w||^2 + c * sum_i logloss(y_i, w.x_i + b) by limited-memory
// quasi-Newton steps; the intercept is not penalized.
LinearModel train_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                           const LogisticConfig& config = {});

Eigen::VectorXd linear_predict_margin(const LinearModel& model, const Eigen::MatrixXd& X);
Eigen::VectorXd linear_predict_proba(const LinearModel& model, const Eigen::MatrixXd& X);

double sigmoid(double z);

}  // namespace ckdprog
