#pragma once

#include "ckdprog/explain/attribution.hpp"

namespace ckdprog {

// Exact Shapley values by full coalition enumeration with factorial weights;
// the coalition value is the background-averaged model output with coalition
// features taken from x and the rest from the background row. O(2^N * K)
// model calls; refuses N > 20.
Eigen::VectorXd exact_shapley(const ModelFn& model_fn, const Eigen::RowVectorXd& x,
                              const Background& background);

// nu(empty set) before the zero-shift: the expected model output over the
// background. Reported as AttributionMatrix::base_value.
double expected_value(const ModelFn& model_fn, const Background& background);

}  // namespace ckdprog
