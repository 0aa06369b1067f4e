#include "ckdprog/data/feature_matrix.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <unordered_set>

#include "ckdprog/common/csv.hpp"
#include "ckdprog/common/errors.hpp"

namespace ckdprog {

std::string to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kLabAggregate: return "lab_aggregate";
    case ColumnKind::kDemographicIndicator: return "demographic_indicator";
    case ColumnKind::kComorbidityIndicator: return "comorbidity_indicator";
    case ColumnKind::kDiagnostic: return "diagnostic";
  }
  return "lab_aggregate";
}

ColumnKind column_kind_from_string(const std::string& text) {
  if (text == "lab_aggregate") return ColumnKind::kLabAggregate;
  if (text == "demographic_indicator") return ColumnKind::kDemographicIndicator;
  if (text == "comorbidity_indicator") return ColumnKind::kComorbidityIndicator;
  if (text == "diagnostic") return ColumnKind::kDiagnostic;
  throw ValidationError("unknown column kind: \"" + text + "\"");
}

int FeatureMatrix::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < column_names.size(); ++i) {
    if (column_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void FeatureMatrix::validate() const {
  if (static_cast<Eigen::Index>(column_names.size()) != values.cols() ||
      column_kinds.size() != column_names.size()) {
    throw ValidationError("FeatureMatrix: column metadata does not match value width");
  }
  if (!row_ids.empty() && static_cast<Eigen::Index>(row_ids.size()) != values.rows()) {
    throw ValidationError("FeatureMatrix: row_ids size does not match row count");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : column_names) {
    if (!seen.insert(name).second) {
      throw ValidationError("FeatureMatrix: duplicate column name \"" + name + "\"");
    }
  }
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const bool indicator = column_kinds[static_cast<std::size_t>(j)] == ColumnKind::kDemographicIndicator ||
                           column_kinds[static_cast<std::size_t>(j)] == ColumnKind::kComorbidityIndicator;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const double v = values(i, j);
      if (!std::isfinite(v)) {
        throw ValidationError("FeatureMatrix: non-finite value in column \"" +
                              column_names[static_cast<std::size_t>(j)] + "\" row " +
                              std::to_string(i));
      }
      if (indicator && v != 0.0 && v != 1.0) {
        throw ValidationError("FeatureMatrix: indicator column \"" +
                              column_names[static_cast<std::size_t>(j)] +
                              "\" holds non-binary value at row " + std::to_string(i));
      }
    }
  }
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<int>& indices) const {
  FeatureMatrix out;
  out.column_names = column_names;
  out.column_kinds = column_kinds;
  out.values.resize(static_cast<Eigen::Index>(indices.size()), values.cols());
  if (!row_ids.empty()) out.row_ids.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(indices[i]);
    if (!row_ids.empty()) out.row_ids.push_back(row_ids[static_cast<std::size_t>(indices[i])]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<int>& indices) const {
  FeatureMatrix out;
  out.row_ids = row_ids;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const int src = indices[j];
    if (src < 0 || src >= values.cols()) {
      throw ValidationError("select_columns: index out of range");
    }
    out.column_names.push_back(column_names[static_cast<std::size_t>(src)]);
    out.column_kinds.push_back(column_kinds[static_cast<std::size_t>(src)]);
    out.values.col(static_cast<Eigen::Index>(j)) = values.col(src);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<std::string>& names) const {
  std::vector<int> indices;
  indices.reserve(names.size());
  for (const auto& name : names) {
    const int idx = column_index(name);
    if (idx < 0) throw ValidationError("select_columns: unknown column \"" + name + "\"");
    indices.push_back(idx);
  }
  return select_columns(indices);
}

namespace {

double parse_cell(const std::string& text, const std::string& path, int line, int column) {
  if (text.empty()) return std::numeric_limits<double>::quiet_NaN();
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + text.size()) {
    throw ValidationError(path + ": line " + std::to_string(line) + ", column " +
                          std::to_string(column + 1) + ": not a number: \"" + text + "\"");
  }
  return v;
}

}  // namespace

FeatureMatrix load_feature_matrix(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  if (table.header.empty() || table.header[0] != "subject_id") {
    throw ValidationError(path + ": first column must be subject_id");
  }
  const int n_cols = static_cast<int>(table.header.size()) - 1;
  if (n_cols <= 0) throw ValidationError(path + ": no feature columns");
  FeatureMatrix m;
  m.column_names.assign(table.header.begin() + 1, table.header.end());
  m.values.resize(static_cast<Eigen::Index>(table.rows.size()), n_cols);
  m.row_ids.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const int line = static_cast<int>(r) + 2;
    m.row_ids.push_back(table.rows[r][0]);
    for (int j = 0; j < n_cols; ++j) {
      m.values(static_cast<Eigen::Index>(r), j) =
          parse_cell(table.rows[r][static_cast<std::size_t>(j + 1)], path, line, j + 1);
    }
  }
  // Columns whose observed values are all 0/1 load as indicators.
  m.column_kinds.resize(static_cast<std::size_t>(n_cols), ColumnKind::kLabAggregate);
  for (int j = 0; j < n_cols; ++j) {
    bool binary = true;
    bool any = false;
    for (Eigen::Index i = 0; i < m.values.rows() && binary; ++i) {
      const double v = m.values(i, j);
      if (std::isnan(v)) continue;
      any = true;
      if (v != 0.0 && v != 1.0) binary = false;
    }
    if (binary && any) m.column_kinds[static_cast<std::size_t>(j)] = ColumnKind::kComorbidityIndicator;
  }
  return m;
}

std::string feature_matrix_to_csv(const FeatureMatrix& m) {
  std::string out;
  std::vector<std::string> header;
  header.reserve(m.column_names.size() + 1);
  header.push_back("subject_id");
  header.insert(header.end(), m.column_names.begin(), m.column_names.end());
  out += csv::format_row(header);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(m.column_names.size() + 1);
    row.push_back(m.row_ids.empty() ? std::to_string(i) : m.row_ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      const double v = m.values(i, j);
      row.push_back(std::isnan(v) ? "" : csv::format_double(v));
    }
    out += csv::format_row(row);
  }
  return out;
}

void save_feature_matrix(const FeatureMatrix& m, const std::string& path) {
  csv::write_file(path, feature_matrix_to_csv(m));
}

}  // namespace ckdprog
