#pragma once

#include <string>
#include <vector>

#include "ckdprog/explain/attribution.hpp"
#include "ckdprog/pipeline/kfre.hpp"

namespace ckdprog {

struct SelectionResult {
  // Top-j names in ranking order, then any missing KFRE-8 columns in role
  // order. |features| always lies in [max(j, 8), j + 8].
  std::vector<std::string> features;
  bool truncated = false;  // j exceeded the ranking size; everything was taken
};

// F = (top-j names from ranking) union (the eight mapped KFRE-8 columns).
// j larger than the ranking takes all ranked names and warns on stderr.
SelectionResult select_features(const FeatureRanking& ranking, int j, const Kfre8Spec& kfre8);

}  // namespace ckdprog
