#include "ckdprog/explain/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ckdprog/common/csv.hpp"
#include "ckdprog/common/errors.hpp"

namespace ckdprog {

void Background::validate() const {
  if (rows.rows() < 1) throw ValidationError("background needs at least one row");
  if (!rows.allFinite()) throw ValidationError("background contains non-finite values");
}

FeatureRanking mean_abs_ranking(const AttributionMatrix& attributions) {
  if (attributions.values.rows() == 0 || attributions.values.cols() == 0)
    throw ValidationError("attribution matrix is empty");
  if (attributions.feature_names.size() != static_cast<std::size_t>(attributions.values.cols()))
    throw ValidationError("attribution matrix and feature names disagree");

  FeatureRanking ranking;
  ranking.reserve(attributions.feature_names.size());
  for (Eigen::Index j = 0; j < attributions.values.cols(); ++j) {
    ranking.push_back({attributions.feature_names[static_cast<std::size_t>(j)],
                       attributions.values.col(j).cwiseAbs().mean()});
  }
  std::sort(ranking.begin(), ranking.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (a.mean_abs_attribution != b.mean_abs_attribution)
      return a.mean_abs_attribution > b.mean_abs_attribution;
    return a.name < b.name;
  });
  return ranking;
}

std::string attribution_to_csv(const AttributionMatrix& attributions) {
  if (attributions.feature_names.size() != static_cast<std::size_t>(attributions.values.cols()))
    throw ValidationError("attribution matrix and feature names disagree");
  std::string out;
  std::vector<std::string> header = attributions.feature_names;
  header.push_back("__base_value__");
  out += csv::format_row(header);
  std::vector<std::string> row(header.size());
  for (Eigen::Index i = 0; i < attributions.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < attributions.values.cols(); ++j)
      row[static_cast<std::size_t>(j)] = csv::format_double(attributions.values(i, j));
    row.back() = csv::format_double(attributions.base_value);
    out += csv::format_row(row);
  }
  return out;
}

void save_attributions(const AttributionMatrix& attributions, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << attribution_to_csv(attributions);
  if (!out) throw ValidationError("failed writing attributions to '" + path + "'");
}

}  // namespace ckdprog
