#include "ckdprog/pipeline/select.hpp"

#include <algorithm>
#include <iostream>

#include "ckdprog/common/errors.hpp"

namespace ckdprog {

SelectionResult select_features(const FeatureRanking& ranking, int j, const Kfre8Spec& kfre8) {
  if (j < 0) throw ValidationError("select_features: j must be >= 0");
  if (ranking.empty() && j > 0) {
    throw ValidationError("select_features: ranking is empty but j > 0");
  }

  SelectionResult result;
  const int available = static_cast<int>(ranking.size());
  const int take = std::min(j, available);
  if (j > available) {
    result.truncated = true;
    std::cerr << "select_features: j=" << j << " exceeds the " << available
              << " ranked features; taking all of them\n";
  }
  result.features.reserve(static_cast<std::size_t>(take) + kKfreRoleCount);
  for (int i = 0; i < take; ++i) result.features.push_back(ranking[static_cast<std::size_t>(i)].name);
  for (const std::string& column : kfre8.column_list()) {
    if (std::find(result.features.begin(), result.features.end(), column) ==
        result.features.end()) {
      result.features.push_back(column);
    }
  }
  return result;
}

}  // namespace ckdprog
