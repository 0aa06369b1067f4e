#pragma once

#include <cstdint>

#include "ckdprog/explain/attribution.hpp"

namespace ckdprog {

// Batched view of a model: rows in, one output per row. The kernel explainer
// evaluates thousands of composite rows, so batch evaluation matters.
using BatchModelFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

// Weighted least squares over coalitions drawn with Shapley kernel weights
//   pi(s) = (N-1) / (C(N,s) * s * (N-s)),
// small and large coalition sizes enumerated completely while the budget
// lasts, the rest sampled. The efficiency constraint sum(phi) = f(x) - base
// is eliminated into the regression, so it holds exactly on every output.
// With n_coalitions >= 2^N - 2 every coalition is enumerated and the result
// is the exact Shapley vector.
//
// Requires n_coalitions >= N + 2. The regression is solved in the
// minimum-norm least-squares sense, so a rank-deficient sampled design
// still yields a well-defined attribution.
Eigen::VectorXd kernel_shap(const BatchModelFn& model_fn, const Eigen::RowVectorXd& x,
                            const Background& background, int n_coalitions, std::uint64_t seed);

Eigen::VectorXd kernel_shap(const ModelFn& model_fn, const Eigen::RowVectorXd& x,
                            const Background& background, int n_coalitions, std::uint64_t seed);

}  // namespace ckdprog
