#pragma once

#include <array>
#include <string>
#include <vector>

namespace ckdprog {

inline constexpr int kKfreRoleCount = 8;

// The eight KFRE-8 roles in fixed order: age, sex, eGFR, UACR, serum
// calcium, serum phosphorus, serum bicarbonate, serum albumin.
const std::array<std::string, kKfreRoleCount>& kfre_role_names();

// Maps each KFRE-8 role to a column name in the feature matrix.
struct Kfre8Spec {
  std::array<std::string, kKfreRoleCount> columns{};

  // Mapped column names in role order.
  std::vector<std::string> column_list() const;

  // All eight roles mapped, names distinct, and every mapped column present
  // in `available`. Violations raise ValidationError naming the role.
  void validate(const std::vector<std::string>& available) const;

  // Mapping onto the kfre_* columns the synthetic generator appends.
  static Kfre8Spec synthetic_default();
};

}  // namespace ckdprog
