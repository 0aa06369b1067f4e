#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ckdprog/pipeline/run.hpp"

namespace ckdprog {

struct ManifestEntry {
  std::string filename;
  std::string content_hash;  // "fnv1a64:" + 16 hex digits of the file bytes
};

struct ReportManifest {
  std::vector<ManifestEntry> entries;  // exactly the six report files

  std::string to_json() const;
};

// FNV-1a over the raw bytes; the manifest hash.
std::uint64_t fnv1a64(const std::string& bytes);

// RunReport round trip. The JSON carries everything emit_report needs, so a
// saved report can be re-emitted without rerunning the pipeline. In-memory
// audit fields (fold row indices, imputation statistics, rankings) are not
// part of the document.
std::string run_report_to_json(const RunReport& report);
RunReport run_report_from_json(const std::string& text);
RunReport load_run_report(const std::string& path);

// Writes metrics.json, metrics.csv, selected_features.csv, cox_summary.csv,
// brier_curve.csv, dynamic_auc_curve.csv into out_dir and returns the
// manifest. Identical reports produce byte-identical files.
ReportManifest emit_report(const RunReport& report, const std::string& out_dir);

}  // namespace ckdprog
