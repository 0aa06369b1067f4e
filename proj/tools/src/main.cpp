#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "ckdprog/common/csv.hpp"
#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/rng.hpp"
#include "ckdprog/data/cohort.hpp"
#include "ckdprog/data/feature_matrix.hpp"
#include "ckdprog/data/folds.hpp"
#include "ckdprog/data/preprocess.hpp"
#include "ckdprog/data/survival_data.hpp"
#include "ckdprog/data/synthetic.hpp"
#include "ckdprog/explain/attribution.hpp"
#include "ckdprog/models/model.hpp"
#include "ckdprog/models/serialize.hpp"
#include "ckdprog/models/tune.hpp"
#include "ckdprog/pipeline/config.hpp"
#include "ckdprog/pipeline/report.hpp"
#include "ckdprog/pipeline/run.hpp"
#include "ckdprog/pipeline/select.hpp"
#include "ckdprog/pipeline/summary.hpp"
#include "ckdprog/survival/cox.hpp"
#include "ckdprog/survival/schoenfeld.hpp"

namespace {

using namespace ckdprog;
using ordered_json = nlohmann::ordered_json;

struct AlignedData {
  FeatureMatrix features;
  SurvivalDataset survival;  // row-aligned with `features`, features attached
};

AlignedData load_aligned(const std::string& features_csv, const std::string& survival_csv) {
  AlignedData data;
  data.features = load_feature_matrix(features_csv);
  SurvivalDataset raw = load_survival_csv(survival_csv);
  const std::vector<std::string> ids = raw.features.row_ids;
  data.survival = align_by_subject(raw, ids, data.features);
  return data;
}

// The progression label and the event indicator come from the same labeler,
// so file-driven runs take y directly from the survival events.
std::vector<int> labels_from_events(const SurvivalDataset& survival) {
  return std::vector<int>(survival.events.data(), survival.events.data() + survival.events.size());
}

// Demo cohort used when synth runs without a config: five signal features
// drive the hazard, twenty are noise, KFRE-8 columns are appended inert.
SyntheticConfig demo_synthetic() {
  SyntheticConfig config;
  config.n_subjects = 1000;
  config.n_signal_features = 5;
  config.n_noise_features = 20;
  config.true_beta = (Eigen::VectorXd(5) << 1.0, -0.5, 0.8, -0.6, 0.4).finished();
  config.censor_rate_target = 0.3;
  config.with_kfre_columns = true;
  return config;
}

struct LoadedInputs {
  FeatureMatrix features;
  SurvivalDataset survival;
  std::vector<int> labels;
};

LoadedInputs load_inputs(const PipelineConfig& config) {
  LoadedInputs data;
  if (config.inputs.use_synthetic) {
    SyntheticCohort cohort = generate_synthetic_cohort(config.inputs.synthetic);
    data.features = std::move(cohort.features);
    data.survival = std::move(cohort.survival);
    data.labels = std::move(cohort.progressed);
    return data;
  }
  if (config.inputs.features_csv.empty() || config.inputs.survival_csv.empty()) {
    throw ValidationError(
        "config inputs: set features_csv and survival_csv, or use_synthetic=true");
  }
  AlignedData aligned = load_aligned(config.inputs.features_csv, config.inputs.survival_csv);
  data.features = std::move(aligned.features);
  data.survival = std::move(aligned.survival);
  data.labels = labels_from_events(data.survival);
  return data;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

double parse_double_cell(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ValidationError(where + ": malformed number \"" + text + "\"");
  }
}

AttributionMatrix load_attributions(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  if (table.header.size() < 2 || table.header.back() != "__base_value__") {
    throw ValidationError(path + ": expected an attribution CSV with a trailing __base_value__ column");
  }
  AttributionMatrix attr;
  attr.feature_names.assign(table.header.begin(), table.header.end() - 1);
  const Eigen::Index n_features = static_cast<Eigen::Index>(attr.feature_names.size());
  attr.values.resize(static_cast<Eigen::Index>(table.rows.size()), n_features);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (static_cast<Eigen::Index>(row.size()) != n_features + 1) {
      throw ValidationError(path + ": row " + std::to_string(i + 2) + " has the wrong width");
    }
    for (Eigen::Index jcol = 0; jcol < n_features; ++jcol) {
      attr.values(static_cast<Eigen::Index>(i), jcol) =
          parse_double_cell(row[static_cast<std::size_t>(jcol)], path);
    }
    if (i == 0) attr.base_value = parse_double_cell(row.back(), path);
  }
  return attr;
}

// Hyperparameter block in the run-config key layout, so tune output can be
// pasted under "hyperparameters".
ordered_json hyper_block(const TrainConfig& config) {
  switch (config.family) {
    case Family::kLr:
      return ordered_json{{"c", config.logistic.c}};
    case Family::kDt:
      return ordered_json{{"max_depth", config.tree.max_depth},
                          {"min_samples_split", config.tree.min_samples_split},
                          {"min_samples_leaf", config.tree.min_samples_leaf}};
    case Family::kRf:
      return ordered_json{{"n_estimators", config.forest.n_estimators},
                          {"max_depth", config.forest.max_depth},
                          {"min_samples_split", config.forest.min_samples_split},
                          {"min_samples_leaf", config.forest.min_samples_leaf}};
    case Family::kGbt:
      return ordered_json{{"n_estimators", config.boosted.n_estimators},
                          {"max_depth", config.boosted.max_depth},
                          {"learning_rate", config.boosted.learning_rate},
                          {"gamma", config.boosted.gamma},
                          {"min_child_weight", config.boosted.min_child_weight},
                          {"subsample", config.boosted.subsample},
                          {"colsample_bytree", config.boosted.colsample_bytree},
                          {"colsample_bylevel", config.boosted.colsample_bylevel}};
    default:
      return ordered_json::object();
  }
}

void write_text(const std::string& path, const std::string& content) {
  csv::write_file(path, content);
}

std::string cox_summary_to_csv(const CoxSummaryTable& table) {
  std::string out = "feature,beta,hazard_ratio,se,ci_lower,ci_upper,p_value\n";
  for (const CoxSummaryRow& row : table.rows) {
    out += csv::format_row({row.feature, csv::format_double(row.beta),
                            csv::format_double(row.hazard_ratio), csv::format_double(row.se),
                            csv::format_double(row.ci_lower), csv::format_double(row.ci_upper),
                            csv::format_double(row.p_value)});
  }
  return out;
}

std::string schoenfeld_to_csv(const SchoenfeldResult& result) {
  std::string out = "feature,slope,p_value\n";
  for (std::size_t f = 0; f < result.feature_names.size(); ++f) {
    out += csv::format_row({result.feature_names[f],
                            csv::format_double(result.slope(static_cast<Eigen::Index>(f))),
                            csv::format_double(result.p_values(static_cast<Eigen::Index>(f)))});
  }
  return out;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + path + "': " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CKD progression modeling toolkit"};
  app.require_subcommand(1);

  // synth -------------------------------------------------------------
  struct {
    std::string config_path, out;
    std::uint64_t seed = 0;
    int n_subjects = 0;
  } synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth_cmd->add_option("--config", synth.config_path, "Run configuration JSON");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  auto* synth_seed = synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  auto* synth_n = synth_cmd->add_option("--n-subjects", synth.n_subjects, "Cohort size");
  synth_cmd->callback([&] {
    SyntheticConfig config = synth.config_path.empty()
                                 ? demo_synthetic()
                                 : load_pipeline_config(synth.config_path).inputs.synthetic;
    if (synth_seed->count() > 0) config.seed = synth.seed;
    if (synth_n->count() > 0) config.n_subjects = synth.n_subjects;
    const SyntheticCohort cohort = generate_synthetic_cohort(config);
    ensure_directory(synth.out);
    save_feature_matrix(cohort.features, join_path(synth.out, "features.csv"));
    write_text(join_path(synth.out, "survival.csv"),
               survival_to_csv(cohort.survival, cohort.features.row_ids));
    write_text(join_path(synth.out, "truth.json"), cohort.truth.to_json());
    std::cerr << "synth: " << config.n_subjects << " subjects, "
              << cohort.features.cols() << " features, censored fraction "
              << cohort.truth.censor_fraction << "\n";
  });

  // label -------------------------------------------------------------
  struct {
    std::string in, out;
  } label;
  auto* label_cmd = app.add_subcommand("label", "Label progression from a diagnosis CSV");
  label_cmd->add_option("--in", label.in, "Diagnosis CSV (subject_id,icd9_code,date)")->required();
  label_cmd->add_option("--out", label.out, "Survival CSV to write")->required();
  label_cmd->callback([&] {
    const std::vector<SubjectTimeline> timelines = load_cohort_events(label.in);
    std::vector<std::string> ids;
    std::vector<double> durations;
    std::vector<int> events;
    int skipped = 0;
    for (const SubjectTimeline& timeline : timelines) {
      ProgressionLabel progression;
      try {
        progression = label_progression(timeline);
      } catch (const NotStageableError&) {
        ++skipped;
        continue;
      }
      ids.push_back(timeline.subject_id);
      const double days = static_cast<double>(progression.duration_days);
      durations.push_back(days == 0.0 ? kZeroDurationShiftDays : days);
      events.push_back(progression.progressed ? 1 : 0);
    }
    if (ids.empty()) throw ValidationError(label.in + ": no stageable subjects");
    SurvivalDataset out;
    out.durations = Eigen::Map<const Eigen::VectorXd>(durations.data(),
                                                      static_cast<Eigen::Index>(durations.size()));
    out.events.resize(static_cast<Eigen::Index>(events.size()));
    for (std::size_t i = 0; i < events.size(); ++i) {
      out.events(static_cast<Eigen::Index>(i)) = events[i];
    }
    write_text(label.out, survival_to_csv(out, ids));
    std::cerr << "label: " << ids.size() << " subjects labeled";
    if (skipped > 0) std::cerr << ", " << skipped << " without staged codes skipped";
    std::cerr << "\n";
  });

  // train -------------------------------------------------------------
  struct {
    std::string features, survival, family = "gbt", out;
    std::uint64_t seed = 0;
  } train;
  auto* train_cmd = app.add_subcommand("train", "Train one classifier family");
  train_cmd->add_option("--features", train.features, "Feature CSV")->required();
  train_cmd->add_option("--survival", train.survival, "Survival CSV")->required();
  train_cmd->add_option("--family", train.family, "Classifier family")
      ->check(CLI::IsMember({"lr", "dt", "rf", "gbt", "mlp", "resmlp"}));
  train_cmd->add_option("--seed", train.seed, "Training seed");
  train_cmd->add_option("--out", train.out, "Model JSON to write")->required();
  train_cmd->callback([&] {
    const AlignedData data = load_aligned(train.features, train.survival);
    const auto prepared = impute_and_standardize(data.features);
    Eigen::VectorXi y = data.survival.events;
    TrainConfig config = default_train_config(family_from_string(train.family));
    config.seed = train.seed;
    const AnyModel model = train_model(prepared.first.values, y, config);
    save_model(model, train.out);
    std::cerr << "train: " << train.family << " fitted on " << prepared.first.rows()
              << " rows, " << prepared.first.cols() << " features\n";
  });

  // tune --------------------------------------------------------------
  struct {
    std::string features, survival, family = "gbt", out;
    int budget = 20, k_folds = 5;
    std::uint64_t seed = 0;
  } tune;
  auto* tune_cmd = app.add_subcommand("tune", "Random-search hyperparameters");
  tune_cmd->add_option("--features", tune.features, "Feature CSV")->required();
  tune_cmd->add_option("--survival", tune.survival, "Survival CSV")->required();
  tune_cmd->add_option("--family", tune.family, "Classifier family")
      ->check(CLI::IsMember({"lr", "dt", "rf", "gbt"}));
  tune_cmd->add_option("--budget", tune.budget, "Candidates to sample");
  tune_cmd->add_option("--k-folds", tune.k_folds, "Cross-validation folds");
  tune_cmd->add_option("--seed", tune.seed, "Search seed");
  tune_cmd->add_option("--out", tune.out, "Best-candidate JSON to write")->required();
  tune_cmd->callback([&] {
    const AlignedData data = load_aligned(tune.features, tune.survival);
    const auto prepared = impute_and_standardize(data.features);
    const Eigen::VectorXi y = data.survival.events;
    const auto folds = split_folds(static_cast<int>(prepared.first.rows()), tune.k_folds,
                                   derive_seed(tune.seed, kFoldSplitStream, 0));
    const TuneResult result = random_search_tune(family_from_string(tune.family),
                                                 prepared.first.values, y, folds, tune.budget,
                                                 tune.seed);
    ordered_json j;
    j["family"] = tune.family;
    j["mean_validation_auroc"] = result.best_score;
    j["hyperparameters"] = ordered_json{{tune.family, hyper_block(result.best)}};
    write_text(tune.out, j.dump(2) + "\n");
    std::cerr << "tune: best mean validation AUROC " << result.best_score << " over "
              << result.candidates.size() << " candidates\n";
  });

  // explain -----------------------------------------------------------
  struct {
    std::string model, features, out;
    int samples = 64, background = 100, kernel_coalitions = 256, kernel_background = 20;
    std::uint64_t seed = 0;
  } explain;
  auto* explain_cmd = app.add_subcommand("explain", "Attribute model output to features");
  explain_cmd->add_option("--model", explain.model, "Model JSON")->required();
  explain_cmd->add_option("--features", explain.features, "Feature CSV")->required();
  explain_cmd->add_option("--samples", explain.samples, "Rows to explain");
  explain_cmd->add_option("--background", explain.background, "Background sample size");
  explain_cmd->add_option("--kernel-coalitions", explain.kernel_coalitions,
                          "Coalition budget for the kernel explainer");
  explain_cmd->add_option("--kernel-background", explain.kernel_background,
                          "Background cap for the kernel explainer");
  explain_cmd->add_option("--seed", explain.seed, "Sampling seed");
  explain_cmd->add_option("--out", explain.out, "Attribution CSV to write")->required();
  explain_cmd->callback([&] {
    const AnyModel model = load_model(explain.model);
    const FeatureMatrix raw = load_feature_matrix(explain.features);
    const auto prepared = impute_and_standardize(raw);
    const Eigen::MatrixXd& x = prepared.first.values;
    const int n = static_cast<int>(x.rows());

    Rng background_rng(derive_seed(explain.seed, kBackgroundStream, 0));
    const std::vector<int> background_idx =
        background_rng.sample_without_replacement(n, std::min(explain.background, n));
    Background background;
    background.rows.resize(static_cast<Eigen::Index>(background_idx.size()), x.cols());
    for (std::size_t i = 0; i < background_idx.size(); ++i) {
      background.rows.row(static_cast<Eigen::Index>(i)) = x.row(background_idx[i]);
    }
    Rng explain_rng(derive_seed(explain.seed, kExplainStream, 0));
    const std::vector<int> explain_idx =
        explain_rng.sample_without_replacement(n, std::min(explain.samples, n));
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(explain_idx.size()), x.cols());
    for (std::size_t i = 0; i < explain_idx.size(); ++i) {
      rows.row(static_cast<Eigen::Index>(i)) = x.row(explain_idx[i]);
    }

    PipelineConfig knobs;
    knobs.kernel_coalitions = explain.kernel_coalitions;
    knobs.kernel_background = explain.kernel_background;
    const AttributionMatrix attr = family_matched_attributions(
        model, rows, background, prepared.first.column_names, knobs,
        derive_seed(explain.seed, kExplainStream, 1));
    save_attributions(attr, explain.out);
    std::cerr << "explain: " << rows.rows() << " rows attributed with the "
              << to_string(model_family(model)) << " explainer\n";
  });

  // select ------------------------------------------------------------
  struct {
    std::string attributions, config_path, out;
    int top_j = 40;
  } select;
  auto* select_cmd = app.add_subcommand("select", "Select top-j features union KFRE-8");
  select_cmd->add_option("--attributions", select.attributions, "Attribution CSV")->required();
  select_cmd->add_option("--config", select.config_path, "Run configuration JSON (KFRE-8 mapping)");
  select_cmd->add_option("--top-j", select.top_j, "Top feature count");
  select_cmd->add_option("--out", select.out, "Selected-feature CSV to write")->required();
  select_cmd->callback([&] {
    const AttributionMatrix attr = load_attributions(select.attributions);
    const Kfre8Spec kfre8 = select.config_path.empty()
                                ? Kfre8Spec::synthetic_default()
                                : load_pipeline_config(select.config_path).kfre8;
    kfre8.validate(attr.feature_names);
    const SelectionResult result = select_features(mean_abs_ranking(attr), select.top_j, kfre8);
    std::string out = "rank,feature\n";
    for (std::size_t i = 0; i < result.features.size(); ++i) {
      out += csv::format_row({std::to_string(i + 1), result.features[i]});
    }
    write_text(select.out, out);
    std::cerr << "select: " << result.features.size() << " features kept\n";
  });

  // cox ---------------------------------------------------------------
  struct {
    std::string features, survival, columns, tie_rule = "efron", out;
    double penalizer = 0.0007;
  } cox;
  auto* cox_cmd = app.add_subcommand("cox", "Fit a penalized Cox model and summarize");
  cox_cmd->add_option("--features", cox.features, "Feature CSV")->required();
  cox_cmd->add_option("--survival", cox.survival, "Survival CSV")->required();
  cox_cmd->add_option("--columns", cox.columns, "Comma-separated feature subset");
  cox_cmd->add_option("--penalizer", cox.penalizer, "Ridge penalizer");
  cox_cmd->add_option("--tie-rule", cox.tie_rule, "Tie rule")
      ->check(CLI::IsMember({"efron", "breslow"}));
  cox_cmd->add_option("--out", cox.out, "Output directory")->required();
  cox_cmd->callback([&] {
    if (!(cox.penalizer >= 0.0)) throw ValidationError("penalizer must be >= 0");
    const AlignedData data = load_aligned(cox.features, cox.survival);
    auto prepared = impute_and_standardize(data.features);
    FeatureMatrix x = cox.columns.empty() ? std::move(prepared.first)
                                          : prepared.first.select_columns(split_commas(cox.columns));
    SurvivalDataset dataset = data.survival.with_features(std::move(x));
    CoxFitOptions options;
    options.penalizer = cox.penalizer;
    options.tie_rule = tie_rule_from_string(cox.tie_rule);
    const FittedCox fitted = fit_cox(dataset, options);
    ensure_directory(cox.out);
    write_text(join_path(cox.out, "cox_summary.csv"),
               cox_summary_to_csv(cox_summary(fitted, dataset)));
    write_text(join_path(cox.out, "schoenfeld.csv"),
               schoenfeld_to_csv(schoenfeld_residuals(fitted, dataset)));
    std::cerr << "cox: converged in " << fitted.convergence.iterations
              << " iterations, gradient norm " << fitted.convergence.gradient_norm << "\n";
  });

  // run ---------------------------------------------------------------
  struct {
    std::string config_path, out, family, tie_rule, brier_mode;
    std::uint64_t seed = 0;
    int jobs = 1, top_j = 40;
    double penalizer = 0.0007;
    bool union_all = false;
  } run;
  auto* run_cmd = app.add_subcommand("run", "End-to-end pipeline run");
  run_cmd->add_option("--config", run.config_path, "Run configuration JSON");
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  auto* run_seed = run_cmd->add_option("--seed", run.seed, "Master seed");
  auto* run_jobs = run_cmd->add_option("--jobs", run.jobs, "Concurrent folds");
  auto* run_family = run_cmd->add_option("--family", run.family, "Classifier family")
                         ->check(CLI::IsMember({"lr", "dt", "rf", "gbt", "mlp", "resmlp", "baseline"}));
  auto* run_top_j = run_cmd->add_option("--top-j", run.top_j, "Top feature count");
  auto* run_penalizer = run_cmd->add_option("--penalizer", run.penalizer, "Ridge penalizer");
  auto* run_tie = run_cmd->add_option("--tie-rule", run.tie_rule, "Tie rule")
                      ->check(CLI::IsMember({"efron", "breslow"}));
  auto* run_brier = run_cmd->add_option("--brier-mode", run.brier_mode, "Brier variant")
                        ->check(CLI::IsMember({"literal", "ipcw"}));
  auto* run_union = run_cmd->add_flag("--union-all-families", run.union_all,
                                      "Union top-j across all six families");
  run_cmd->callback([&] {
    PipelineConfig config =
        run.config_path.empty() ? PipelineConfig{} : load_pipeline_config(run.config_path);
    if (run_seed->count() > 0) config.seed = run.seed;
    if (run_jobs->count() > 0) config.jobs = run.jobs;
    if (run_family->count() > 0) config.family = family_from_string(run.family);
    if (run_top_j->count() > 0) config.top_j = run.top_j;
    if (run_penalizer->count() > 0) config.penalizer = run.penalizer;
    if (run_tie->count() > 0) config.tie_rule = tie_rule_from_string(run.tie_rule);
    if (run_brier->count() > 0) config.brier_mode = brier_mode_from_string(run.brier_mode);
    if (run_union->count() > 0) config.union_all_families = run.union_all;
    config.validate();
    const LoadedInputs data = load_inputs(config);
    const RunReport report = run_pipeline(data.features, data.survival, data.labels, config);
    const ReportManifest manifest = emit_report(report, run.out);
    std::cout << manifest.to_json();
  });

  // report ------------------------------------------------------------
  struct {
    std::string in, out;
  } report;
  auto* report_cmd = app.add_subcommand("report", "Re-emit files from a saved report");
  report_cmd->add_option("--in", report.in, "metrics.json from a previous run")->required();
  report_cmd->add_option("--out", report.out, "Output directory")->required();
  report_cmd->callback([&] {
    const RunReport loaded = load_run_report(report.in);
    const ReportManifest manifest = emit_report(loaded, report.out);
    std::cout << manifest.to_json();
  });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
