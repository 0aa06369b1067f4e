#include "ckdprog/pipeline/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ckdprog/common/csv.hpp"
#include "ckdprog/common/errors.hpp"

namespace ckdprog {
namespace {

using ordered_json = nlohmann::ordered_json;

// NaN serializes to null and parses back to NaN, so aggregates over empty
// groups survive the round trip.
double json_to_double(const ordered_json& value) {
  return value.is_null() ? std::numeric_limits<double>::quiet_NaN() : value.get<double>();
}

std::string hash_string(std::uint64_t hash) {
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

// CSV cells: empty for non-finite values so omissions stay visible without
// fabricating numbers.
std::string cell(double value) {
  return std::isfinite(value) ? csv::format_double(value) : std::string();
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

ordered_json aggregate_to_json(const AggregateStat& stat) {
  return ordered_json{{"mean", stat.mean}, {"sd", stat.sd}, {"n", stat.n}};
}

AggregateStat aggregate_from_json(const ordered_json& j) {
  AggregateStat stat;
  stat.mean = json_to_double(j.at("mean"));
  stat.sd = json_to_double(j.at("sd"));
  stat.n = j.at("n").get<int>();
  return stat;
}

std::string metrics_csv(const RunReport& report) {
  std::string out = "metric,fold,horizon_days,value\n";
  const auto row = [&out](const std::string& metric, const std::string& fold,
                          const std::string& horizon, const std::string& value) {
    out += csv::format_row({metric, fold, horizon, value});
    out += "\n";
  };
  for (const FoldReport& fold : report.folds) {
    row("auroc", std::to_string(fold.fold), "", cell(fold.classifier_auroc));
  }
  for (const FoldReport& fold : report.folds) {
    row("c_index_train", std::to_string(fold.fold), "", cell(fold.c_index_train));
  }
  for (const FoldReport& fold : report.folds) {
    row("c_index_test", std::to_string(fold.fold), "", cell(fold.c_index_test));
  }
  const std::vector<double>& horizons = report.config.horizons_days;
  for (const FoldReport& fold : report.folds) {
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      row("brier", std::to_string(fold.fold), csv::format_double(horizons[h]),
          cell(fold.brier[h]));
    }
  }
  for (const FoldReport& fold : report.folds) {
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      const DynamicAucPoint& point = fold.dynamic_auc_points[h];
      row("dynamic_auc", std::to_string(fold.fold), csv::format_double(horizons[h]),
          point.valid ? cell(point.value) : std::string());
    }
  }
  row("auroc", "mean", "", cell(report.classifier_auroc.mean));
  row("auroc", "sd", "", cell(report.classifier_auroc.sd));
  row("c_index_test", "mean", "", cell(report.c_index_test.mean));
  row("c_index_test", "sd", "", cell(report.c_index_test.sd));
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    row("brier", "mean", csv::format_double(horizons[h]), cell(report.brier[h].mean));
    row("brier", "sd", csv::format_double(horizons[h]), cell(report.brier[h].sd));
  }
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    row("dynamic_auc", "mean", csv::format_double(horizons[h]), cell(report.dynamic_auc[h].mean));
    row("dynamic_auc", "sd", csv::format_double(horizons[h]), cell(report.dynamic_auc[h].sd));
  }
  return out;
}

std::string selected_features_csv(const RunReport& report) {
  std::string out = "fold,rank,feature\n";
  for (const FoldReport& fold : report.folds) {
    for (std::size_t i = 0; i < fold.selected_features.size(); ++i) {
      out += csv::format_row({std::to_string(fold.fold), std::to_string(i + 1),
                              fold.selected_features[i]});
      out += "\n";
    }
  }
  return out;
}

std::string cox_summary_csv(const RunReport& report) {
  std::string out = "feature,beta,hazard_ratio,se,ci_lower,ci_upper,p_value\n";
  for (const CoxSummaryRow& row : report.cox_summary_table.rows) {
    out += csv::format_row({row.feature, cell(row.beta), cell(row.hazard_ratio), cell(row.se),
                            cell(row.ci_lower), cell(row.ci_upper), cell(row.p_value)});
    out += "\n";
  }
  return out;
}

std::string brier_curve_csv(const RunReport& report) {
  std::string out = "fold,horizon_days,value\n";
  const std::vector<double>& horizons = report.config.horizons_days;
  for (const FoldReport& fold : report.folds) {
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      out += csv::format_row({std::to_string(fold.fold), csv::format_double(horizons[h]),
                              cell(fold.brier[h])});
      out += "\n";
    }
  }
  return out;
}

std::string dynamic_auc_curve_csv(const RunReport& report) {
  std::string out = "fold,horizon_days,value,valid\n";
  const std::vector<double>& horizons = report.config.horizons_days;
  for (const FoldReport& fold : report.folds) {
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      const DynamicAucPoint& point = fold.dynamic_auc_points[h];
      out += csv::format_row({std::to_string(fold.fold), csv::format_double(horizons[h]),
                              point.valid ? cell(point.value) : std::string(),
                              point.valid ? "1" : "0"});
      out += "\n";
    }
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string ReportManifest::to_json() const {
  ordered_json j;
  j["files"] = ordered_json::array();
  for (const ManifestEntry& entry : entries) {
    j["files"].push_back({{"filename", entry.filename}, {"content_hash", entry.content_hash}});
  }
  return j.dump(2) + "\n";
}

std::string run_report_to_json(const RunReport& report) {
  ordered_json j;
  j["config"] = ordered_json::parse(pipeline_config_to_json(report.config));
  j["folds"] = ordered_json::array();
  const std::vector<double>& horizons = report.config.horizons_days;
  for (const FoldReport& fold : report.folds) {
    ordered_json fj;
    fj["fold"] = fold.fold;
    fj["classifier_auroc"] = fold.classifier_auroc;
    fj["selected_features"] = fold.selected_features;
    fj["c_index_train"] = fold.c_index_train;
    fj["c_index_test"] = fold.c_index_test;
    fj["brier"] = ordered_json::array();
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      fj["brier"].push_back({{"horizon_days", horizons[h]}, {"value", fold.brier[h]}});
    }
    fj["dynamic_auc"] = ordered_json::array();
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      const DynamicAucPoint& point = fold.dynamic_auc_points[h];
      fj["dynamic_auc"].push_back({{"horizon_days", horizons[h]},
                                   {"value", point.valid ? point.value : std::numeric_limits<double>::quiet_NaN()},
                                   {"valid", point.valid}});
    }
    j["folds"].push_back(std::move(fj));
  }
  j["best_fold"] = report.best_fold;
  ordered_json aggregates;
  aggregates["classifier_auroc"] = aggregate_to_json(report.classifier_auroc);
  aggregates["c_index_test"] = aggregate_to_json(report.c_index_test);
  aggregates["brier"] = ordered_json::array();
  aggregates["dynamic_auc"] = ordered_json::array();
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    ordered_json bj = aggregate_to_json(report.brier[h]);
    bj.emplace("horizon_days", horizons[h]);
    aggregates["brier"].push_back(std::move(bj));
    ordered_json dj = aggregate_to_json(report.dynamic_auc[h]);
    dj.emplace("horizon_days", horizons[h]);
    aggregates["dynamic_auc"].push_back(std::move(dj));
  }
  j["aggregates"] = std::move(aggregates);
  j["cox_summary"] = ordered_json::array();
  for (const CoxSummaryRow& row : report.cox_summary_table.rows) {
    j["cox_summary"].push_back({{"feature", row.feature},
                                {"beta", row.beta},
                                {"hazard_ratio", row.hazard_ratio},
                                {"se", row.se},
                                {"ci_lower", row.ci_lower},
                                {"ci_upper", row.ci_upper},
                                {"p_value", row.p_value}});
  }
  j["schoenfeld"] = {{"n_events", report.schoenfeld.n_events},
                     {"features", report.schoenfeld.features},
                     {"slopes", report.schoenfeld.slopes},
                     {"p_values", report.schoenfeld.p_values}};
  return j.dump(2) + "\n";
}

RunReport run_report_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report parse: ") + e.what());
  }
  RunReport report;
  try {
    report.config = pipeline_config_from_json(j.at("config").dump());
    for (const auto& fj : j.at("folds")) {
      FoldReport fold;
      fold.fold = fj.at("fold").get<int>();
      fold.classifier_auroc = json_to_double(fj.at("classifier_auroc"));
      fold.selected_features = fj.at("selected_features").get<std::vector<std::string>>();
      fold.c_index_train = json_to_double(fj.at("c_index_train"));
      fold.c_index_test = json_to_double(fj.at("c_index_test"));
      for (const auto& bj : fj.at("brier")) fold.brier.push_back(json_to_double(bj.at("value")));
      for (const auto& dj : fj.at("dynamic_auc")) {
        DynamicAucPoint point;
        point.time = dj.at("horizon_days").get<double>();
        point.valid = dj.at("valid").get<bool>();
        point.value = point.valid ? json_to_double(dj.at("value")) : 0.0;
        fold.dynamic_auc_points.push_back(point);
      }
      report.folds.push_back(std::move(fold));
    }
    report.best_fold = j.at("best_fold").get<int>();
    const auto& aggregates = j.at("aggregates");
    report.classifier_auroc = aggregate_from_json(aggregates.at("classifier_auroc"));
    report.c_index_test = aggregate_from_json(aggregates.at("c_index_test"));
    for (const auto& bj : aggregates.at("brier")) report.brier.push_back(aggregate_from_json(bj));
    for (const auto& dj : aggregates.at("dynamic_auc")) {
      report.dynamic_auc.push_back(aggregate_from_json(dj));
    }
    for (const auto& rj : j.at("cox_summary")) {
      CoxSummaryRow row;
      row.feature = rj.at("feature").get<std::string>();
      row.beta = json_to_double(rj.at("beta"));
      row.hazard_ratio = json_to_double(rj.at("hazard_ratio"));
      row.se = json_to_double(rj.at("se"));
      row.ci_lower = json_to_double(rj.at("ci_lower"));
      row.ci_upper = json_to_double(rj.at("ci_upper"));
      row.p_value = json_to_double(rj.at("p_value"));
      report.cox_summary_table.rows.push_back(std::move(row));
    }
    const auto& sj = j.at("schoenfeld");
    report.schoenfeld.n_events = sj.at("n_events").get<int>();
    report.schoenfeld.features = sj.at("features").get<std::vector<std::string>>();
    report.schoenfeld.slopes = sj.at("slopes").get<std::vector<double>>();
    report.schoenfeld.p_values = sj.at("p_values").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
  return report;
}

RunReport load_run_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open report file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return run_report_from_json(buffer.str());
}

ReportManifest emit_report(const RunReport& report, const std::string& out_dir) {
  for (const FoldReport& fold : report.folds) {
    if (fold.brier.size() != report.config.horizons_days.size() ||
        fold.dynamic_auc_points.size() != report.config.horizons_days.size()) {
      throw ValidationError("emit_report: fold metric tables do not match the horizon list");
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + out_dir + "': " + ec.message());

  const std::vector<std::pair<std::string, std::string>> files = {
      {"metrics.json", run_report_to_json(report)},
      {"metrics.csv", metrics_csv(report)},
      {"selected_features.csv", selected_features_csv(report)},
      {"cox_summary.csv", cox_summary_csv(report)},
      {"brier_curve.csv", brier_curve_csv(report)},
      {"dynamic_auc_curve.csv", dynamic_auc_curve_csv(report)},
  };
  ReportManifest manifest;
  for (const auto& [name, content] : files) {
    write_bytes((std::filesystem::path(out_dir) / name).string(), content);
    manifest.entries.push_back({name, hash_string(fnv1a64(content))});
  }
  return manifest;
}

}  // namespace ckdprog
