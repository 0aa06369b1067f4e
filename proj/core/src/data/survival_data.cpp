#include "ckdprog/data/survival_data.hpp"

#include <cmath>
#include <cstdlib>
#include <unordered_map>

#include "ckdprog/common/csv.hpp"
#include "ckdprog/common/errors.hpp"

namespace ckdprog {

void SurvivalDataset::validate() const {
  if (events.size() != durations.size()) {
    throw ValidationError("SurvivalDataset: durations/events length mismatch");
  }
  if (features.values.size() > 0 && features.values.rows() != durations.size()) {
    throw ValidationError("SurvivalDataset: feature rows not aligned to durations");
  }
  for (Eigen::Index i = 0; i < durations.size(); ++i) {
    if (!(durations[i] > 0.0) || !std::isfinite(durations[i])) {
      throw ValidationError("SurvivalDataset: duration must be positive and finite at row " +
                            std::to_string(i));
    }
    if (events[i] != 0 && events[i] != 1) {
      throw ValidationError("SurvivalDataset: event indicator must be 0/1 at row " +
                            std::to_string(i));
    }
  }
}

SurvivalDataset SurvivalDataset::select_rows(const std::vector<int>& indices) const {
  SurvivalDataset out;
  out.durations.resize(static_cast<Eigen::Index>(indices.size()));
  out.events.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.durations[static_cast<Eigen::Index>(i)] = durations[indices[i]];
    out.events[static_cast<Eigen::Index>(i)] = events[indices[i]];
  }
  if (features.values.size() > 0) out.features = features.select_rows(indices);
  return out;
}

SurvivalDataset SurvivalDataset::with_features(FeatureMatrix f) const {
  SurvivalDataset out;
  out.durations = durations;
  out.events = events;
  out.features = std::move(f);
  return out;
}

SurvivalDataset load_survival_csv(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  const std::vector<std::string> expected = {"subject_id", "duration_days", "event"};
  if (table.header != expected) {
    throw ValidationError(path + ": expected header \"subject_id,duration_days,event\"");
  }
  SurvivalDataset data;
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  data.durations.resize(n);
  data.events.resize(n);
  data.features.row_ids.reserve(table.rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const int line = static_cast<int>(i) + 2;
    data.features.row_ids.push_back(row[0]);
    char* end = nullptr;
    double duration = std::strtod(row[1].c_str(), &end);
    if (end != row[1].c_str() + row[1].size() || !std::isfinite(duration) || duration < 0.0) {
      throw ValidationError(path + ": line " + std::to_string(line) +
                            ": bad duration \"" + row[1] + "\"");
    }
    if (duration == 0.0) duration = kZeroDurationShiftDays;
    data.durations[i] = duration;
    if (row[2] == "0") {
      data.events[i] = 0;
    } else if (row[2] == "1") {
      data.events[i] = 1;
    } else {
      throw ValidationError(path + ": line " + std::to_string(line) +
                            ": event must be 0 or 1, got \"" + row[2] + "\"");
    }
  }
  return data;
}

std::string survival_to_csv(const SurvivalDataset& data,
                            const std::vector<std::string>& subject_ids) {
  std::string out = "subject_id,duration_days,event\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    std::vector<std::string> row;
    row.push_back(subject_ids.empty() ? std::to_string(i) : subject_ids[static_cast<std::size_t>(i)]);
    row.push_back(csv::format_double(data.durations[i]));
    row.push_back(std::to_string(data.events[i]));
    out += csv::format_row(row);
  }
  return out;
}

SurvivalDataset align_by_subject(const SurvivalDataset& data,
                                 const std::vector<std::string>& data_ids,
                                 const FeatureMatrix& features) {
  if (features.row_ids.empty()) {
    throw ValidationError("align_by_subject: feature matrix has no subject ids");
  }
  if (data_ids.size() != static_cast<std::size_t>(data.size())) {
    throw ValidationError("align_by_subject: id list does not match survival rows");
  }
  std::unordered_map<std::string, int> position;
  position.reserve(data_ids.size());
  for (std::size_t i = 0; i < data_ids.size(); ++i) {
    if (!position.emplace(data_ids[i], static_cast<int>(i)).second) {
      throw ValidationError("align_by_subject: duplicate subject id \"" + data_ids[i] + "\"");
    }
  }
  std::vector<int> order;
  order.reserve(features.row_ids.size());
  for (const auto& id : features.row_ids) {
    const auto it = position.find(id);
    if (it == position.end()) {
      throw ValidationError("align_by_subject: subject \"" + id + "\" has features but no survival row");
    }
    order.push_back(it->second);
  }
  if (order.size() != data_ids.size()) {
    throw ValidationError("align_by_subject: survival rows without matching features");
  }
  SurvivalDataset out = data.select_rows(order);
  out.features = features;
  return out;
}

}  // namespace ckdprog
