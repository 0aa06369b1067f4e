#pragma once

#include <cstdint>
#include <vector>

namespace ckdprog {

// Partitions {0..n-1} into k disjoint folds whose sizes differ by at most
// one, by dealing a seeded shuffle round-robin. Deterministic in (n, k, seed).
// Requires 2 <= k <= n.
std::vector<std::vector<int>> split_folds(int n, int k, std::uint64_t seed);

// Complement of fold `fold_index` within {0..n-1}, ascending.
std::vector<int> train_indices(const std::vector<std::vector<int>>& folds, int n, int fold_index);

}  // namespace ckdprog
