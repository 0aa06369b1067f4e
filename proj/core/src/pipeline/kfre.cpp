#include "ckdprog/pipeline/kfre.hpp"

#include <algorithm>
#include <set>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/data/synthetic.hpp"

namespace ckdprog {

const std::array<std::string, kKfreRoleCount>& kfre_role_names() {
  static const std::array<std::string, kKfreRoleCount> names = {
      "age",     "sex",        "egfr",        "uacr",
      "calcium", "phosphorus", "bicarbonate", "albumin"};
  return names;
}

std::vector<std::string> Kfre8Spec::column_list() const {
  return std::vector<std::string>(columns.begin(), columns.end());
}

void Kfre8Spec::validate(const std::vector<std::string>& available) const {
  const auto& roles = kfre_role_names();
  std::set<std::string> seen;
  for (int r = 0; r < kKfreRoleCount; ++r) {
    if (columns[r].empty()) {
      throw ValidationError("kfre8 role '" + roles[r] + "' has no column mapped");
    }
    if (!seen.insert(columns[r]).second) {
      throw ValidationError("kfre8 role '" + roles[r] + "' maps to '" + columns[r] +
                            "', already claimed by another role");
    }
    if (std::find(available.begin(), available.end(), columns[r]) == available.end()) {
      throw ValidationError("kfre8 role '" + roles[r] + "' maps to '" + columns[r] +
                            "', not a column of the feature matrix");
    }
  }
}

Kfre8Spec Kfre8Spec::synthetic_default() {
  Kfre8Spec spec;
  const auto& names = synthetic_kfre_column_names();
  for (int r = 0; r < kKfreRoleCount; ++r) spec.columns[r] = names[static_cast<std::size_t>(r)];
  return spec;
}

}  // namespace ckdprog
