#pragma once

#include "ckdprog/explain/attribution.hpp"
#include "ckdprog/models/linear.hpp"

namespace ckdprog {

// Closed form for a linear margin under the interventional value function:
// phi_j = w_j * (x_j - mean background_j).
Eigen::VectorXd linear_shap(const LinearModel& model, const Eigen::RowVectorXd& x,
                            const Background& background);

}  // namespace ckdprog
