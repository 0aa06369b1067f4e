#include "ckdprog/data/folds.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/rng.hpp"

namespace ckdprog {

std::vector<std::vector<int>> split_folds(int n, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("split_folds: k must be at least 2, got " + std::to_string(k));
  if (k > n) {
    throw ValidationError("split_folds: k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
  for (int i = 0; i < n; ++i) {
    folds[static_cast<std::size_t>(i % k)].push_back(order[static_cast<std::size_t>(i)]);
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

std::vector<int> train_indices(const std::vector<std::vector<int>>& folds, int n, int fold_index) {
  std::vector<bool> held_out(static_cast<std::size_t>(n), false);
  for (const int i : folds[static_cast<std::size_t>(fold_index)]) {
    held_out[static_cast<std::size_t>(i)] = true;
  }
  std::vector<int> train;
  train.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (!held_out[static_cast<std::size_t>(i)]) train.push_back(i);
  }
  return train;
}

}  // namespace ckdprog
