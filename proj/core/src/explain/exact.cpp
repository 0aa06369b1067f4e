#include "ckdprog/explain/exact.hpp"

#include <vector>

#include "ckdprog/common/errors.hpp"

namespace ckdprog {

double expected_value(const ModelFn& model_fn, const Background& background) {
  background.validate();
  double sum = 0.0;
  for (Eigen::Index r = 0; r < background.rows.rows(); ++r)
    sum += model_fn(background.rows.row(r));
  return sum / static_cast<double>(background.rows.rows());
}

Eigen::VectorXd exact_shapley(const ModelFn& model_fn, const Eigen::RowVectorXd& x,
                              const Background& background) {
  background.validate();
  const int n = static_cast<int>(x.size());
  if (n < 1) throw ValidationError("need at least one feature");
  if (background.rows.cols() != n)
    throw ValidationError("background has " + std::to_string(background.rows.cols()) +
                          " columns but x has " + std::to_string(n));
  if (n > 20)
    throw CapacityError("exact enumeration over " + std::to_string(n) +
                        " features exceeds the 20-feature cap");

  // Coalition values for every mask, averaged over background rows. Constant
  // shifts cancel inside the marginal differences, so nu(0) needs no
  // explicit zeroing.
  const std::uint32_t n_masks = 1u << n;
  std::vector<double> value(n_masks, 0.0);
  const Eigen::Index k = background.rows.rows();
  Eigen::RowVectorXd composite(n);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
      for (int j = 0; j < n; ++j)
        composite[j] = (mask >> j) & 1u ? x[j] : background.rows(r, j);
      value[mask] += model_fn(composite);
    }
  }
  for (double& v : value) v /= static_cast<double>(k);

  // w(s) = s! (n-1-s)! / n! = 1 / (n * C(n-1, s)).
  std::vector<double> weight(static_cast<std::size_t>(n), 0.0);
  for (int s = 0; s < n; ++s) {
    double binom = 1.0;
    for (int i = 0; i < s; ++i) binom = binom * static_cast<double>(n - 1 - i) / (i + 1);
    weight[static_cast<std::size_t>(s)] = 1.0 / (static_cast<double>(n) * binom);
  }

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const std::uint32_t bit = 1u << j;
    for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
      if (mask & bit) continue;
      const int size = __builtin_popcount(mask);
      phi[j] += weight[static_cast<std::size_t>(size)] * (value[mask | bit] - value[mask]);
    }
  }
  return phi;
}

}  // namespace ckdprog
