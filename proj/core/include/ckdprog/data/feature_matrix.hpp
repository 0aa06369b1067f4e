#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace ckdprog {

enum class ColumnKind {
  kLabAggregate,
  kDemographicIndicator,
  kComorbidityIndicator,
  kDiagnostic,
};

std::string to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& text);

// M x N numeric table with named, typed columns. Missing values are NaN until
// imputation; validate() enforces the post-imputation invariants.
struct FeatureMatrix {
  std::vector<std::string> column_names;
  std::vector<ColumnKind> column_kinds;
  Eigen::MatrixXd values;                // rows = subjects
  std::vector<std::string> row_ids;      // optional; empty or size == rows

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  int column_index(const std::string& name) const;  // -1 when absent

  // Checks name uniqueness, finiteness, and {0,1} values in indicator columns.
  void validate() const;

  FeatureMatrix select_rows(const std::vector<int>& indices) const;
  FeatureMatrix select_columns(const std::vector<int>& indices) const;
  FeatureMatrix select_columns(const std::vector<std::string>& names) const;
};

// Reads a feature CSV: header row of column names, first column `subject_id`,
// empty cells meaning missing. Column kinds default to lab_aggregate except
// columns whose observed values all lie in {0,1}, which load as
// comorbidity_indicator; callers may override kinds afterwards.
FeatureMatrix load_feature_matrix(const std::string& path);

std::string feature_matrix_to_csv(const FeatureMatrix& m);

void save_feature_matrix(const FeatureMatrix& m, const std::string& path);

}  // namespace ckdprog
