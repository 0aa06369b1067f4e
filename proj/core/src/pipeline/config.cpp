#include "ckdprog/pipeline/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ckdprog/common/errors.hpp"

namespace ckdprog {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string sampling_to_string(FeatureSampling sampling) {
  return sampling == FeatureSampling::kSqrt ? "sqrt" : "all";
}

FeatureSampling sampling_from_string(const std::string& text) {
  if (text == "sqrt") return FeatureSampling::kSqrt;
  if (text == "all") return FeatureSampling::kAll;
  throw ValidationError("unknown feature_sampling '" + text + "' (expected sqrt or all)");
}

// Unknown keys are config typos; silently ignoring them would run with
// defaults the user believes overridden.
void check_keys(const ordered_json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ValidationError("config: unknown field '" + where + item.key() + "'");
  }
}

template <typename T>
void read_field(const ordered_json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

ordered_json kfre_to_json(const Kfre8Spec& spec) {
  ordered_json j = ordered_json::object();
  const auto& roles = kfre_role_names();
  for (int r = 0; r < kKfreRoleCount; ++r) j[roles[r]] = spec.columns[r];
  return j;
}

Kfre8Spec kfre_from_json(const ordered_json& j, const Kfre8Spec& defaults) {
  const auto& roles = kfre_role_names();
  check_keys(j, "kfre8.",
             {"age", "sex", "egfr", "uacr", "calcium", "phosphorus", "bicarbonate", "albumin"});
  Kfre8Spec spec = defaults;
  for (int r = 0; r < kKfreRoleCount; ++r) {
    if (j.contains(roles[r])) spec.columns[r] = j.at(roles[r]).get<std::string>();
  }
  return spec;
}

ordered_json hyper_to_json(const FamilyHyperparameters& h) {
  ordered_json j = ordered_json::object();
  j["lr"] = {{"c", h.logistic.c},
             {"max_iterations", h.logistic.max_iterations},
             {"tolerance", h.logistic.tolerance}};
  j["dt"] = {{"max_depth", h.tree.max_depth},
             {"min_samples_split", h.tree.min_samples_split},
             {"min_samples_leaf", h.tree.min_samples_leaf}};
  j["rf"] = {{"n_estimators", h.forest.n_estimators},
             {"max_depth", h.forest.max_depth},
             {"min_samples_split", h.forest.min_samples_split},
             {"min_samples_leaf", h.forest.min_samples_leaf},
             {"bootstrap", h.forest.bootstrap},
             {"feature_sampling", sampling_to_string(h.forest.feature_sampling)}};
  j["gbt"] = {{"n_estimators", h.boosted.n_estimators},
              {"max_depth", h.boosted.max_depth},
              {"learning_rate", h.boosted.learning_rate},
              {"gamma", h.boosted.gamma},
              {"min_child_weight", h.boosted.min_child_weight},
              {"subsample", h.boosted.subsample},
              {"colsample_bytree", h.boosted.colsample_bytree},
              {"colsample_bylevel", h.boosted.colsample_bylevel},
              {"reg_lambda", h.boosted.reg_lambda}};
  j["mlp"] = {{"hidden_dims", h.mlp.hidden_dims},
              {"dropout_rate", h.mlp.dropout_rate},
              {"learning_rate", h.mlp.learning_rate},
              {"weight_decay", h.mlp.weight_decay},
              {"max_epochs", h.mlp.max_epochs},
              {"patience", h.mlp.patience},
              {"batch_size", h.mlp.batch_size},
              {"validation_fraction", h.mlp.validation_fraction}};
  j["resmlp"] = {{"n_blocks", h.resmlp.n_blocks},
                 {"hidden_dim", h.resmlp.hidden_dim},
                 {"dropout_rate", h.resmlp.dropout_rate},
                 {"learning_rate", h.resmlp.learning_rate},
                 {"weight_decay", h.resmlp.weight_decay},
                 {"max_epochs", h.resmlp.max_epochs},
                 {"patience", h.resmlp.patience},
                 {"batch_size", h.resmlp.batch_size},
                 {"validation_fraction", h.resmlp.validation_fraction}};
  return j;
}

FamilyHyperparameters hyper_from_json(const ordered_json& j, FamilyHyperparameters h) {
  check_keys(j, "hyperparameters.", {"lr", "dt", "rf", "gbt", "mlp", "resmlp"});
  if (j.contains("lr")) {
    const auto& b = j.at("lr");
    check_keys(b, "hyperparameters.lr.", {"c", "max_iterations", "tolerance"});
    read_field(b, "c", h.logistic.c);
    read_field(b, "max_iterations", h.logistic.max_iterations);
    read_field(b, "tolerance", h.logistic.tolerance);
  }
  if (j.contains("dt")) {
    const auto& b = j.at("dt");
    check_keys(b, "hyperparameters.dt.", {"max_depth", "min_samples_split", "min_samples_leaf"});
    read_field(b, "max_depth", h.tree.max_depth);
    read_field(b, "min_samples_split", h.tree.min_samples_split);
    read_field(b, "min_samples_leaf", h.tree.min_samples_leaf);
  }
  if (j.contains("rf")) {
    const auto& b = j.at("rf");
    check_keys(b, "hyperparameters.rf.",
               {"n_estimators", "max_depth", "min_samples_split", "min_samples_leaf", "bootstrap",
                "feature_sampling"});
    read_field(b, "n_estimators", h.forest.n_estimators);
    read_field(b, "max_depth", h.forest.max_depth);
    read_field(b, "min_samples_split", h.forest.min_samples_split);
    read_field(b, "min_samples_leaf", h.forest.min_samples_leaf);
    read_field(b, "bootstrap", h.forest.bootstrap);
    if (b.contains("feature_sampling")) {
      h.forest.feature_sampling = sampling_from_string(b.at("feature_sampling").get<std::string>());
    }
  }
  if (j.contains("gbt")) {
    const auto& b = j.at("gbt");
    check_keys(b, "hyperparameters.gbt.",
               {"n_estimators", "max_depth", "learning_rate", "gamma", "min_child_weight",
                "subsample", "colsample_bytree", "colsample_bylevel", "reg_lambda"});
    read_field(b, "n_estimators", h.boosted.n_estimators);
    read_field(b, "max_depth", h.boosted.max_depth);
    read_field(b, "learning_rate", h.boosted.learning_rate);
    read_field(b, "gamma", h.boosted.gamma);
    read_field(b, "min_child_weight", h.boosted.min_child_weight);
    read_field(b, "subsample", h.boosted.subsample);
    read_field(b, "colsample_bytree", h.boosted.colsample_bytree);
    read_field(b, "colsample_bylevel", h.boosted.colsample_bylevel);
    read_field(b, "reg_lambda", h.boosted.reg_lambda);
  }
  if (j.contains("mlp")) {
    const auto& b = j.at("mlp");
    check_keys(b, "hyperparameters.mlp.",
               {"hidden_dims", "dropout_rate", "learning_rate", "weight_decay", "max_epochs",
                "patience", "batch_size", "validation_fraction"});
    read_field(b, "hidden_dims", h.mlp.hidden_dims);
    read_field(b, "dropout_rate", h.mlp.dropout_rate);
    read_field(b, "learning_rate", h.mlp.learning_rate);
    read_field(b, "weight_decay", h.mlp.weight_decay);
    read_field(b, "max_epochs", h.mlp.max_epochs);
    read_field(b, "patience", h.mlp.patience);
    read_field(b, "batch_size", h.mlp.batch_size);
    read_field(b, "validation_fraction", h.mlp.validation_fraction);
  }
  if (j.contains("resmlp")) {
    const auto& b = j.at("resmlp");
    check_keys(b, "hyperparameters.resmlp.",
               {"n_blocks", "hidden_dim", "dropout_rate", "learning_rate", "weight_decay",
                "max_epochs", "patience", "batch_size", "validation_fraction"});
    read_field(b, "n_blocks", h.resmlp.n_blocks);
    read_field(b, "hidden_dim", h.resmlp.hidden_dim);
    read_field(b, "dropout_rate", h.resmlp.dropout_rate);
    read_field(b, "learning_rate", h.resmlp.learning_rate);
    read_field(b, "weight_decay", h.resmlp.weight_decay);
    read_field(b, "max_epochs", h.resmlp.max_epochs);
    read_field(b, "patience", h.resmlp.patience);
    read_field(b, "batch_size", h.resmlp.batch_size);
    read_field(b, "validation_fraction", h.resmlp.validation_fraction);
  }
  h.mlp.arch = MlpArch::kPlain;
  h.resmlp.arch = MlpArch::kResidual;
  return h;
}

ordered_json synthetic_to_json(const SyntheticConfig& s) {
  ordered_json j = ordered_json::object();
  j["n_subjects"] = s.n_subjects;
  j["n_signal_features"] = s.n_signal_features;
  j["n_noise_features"] = s.n_noise_features;
  j["true_beta"] = std::vector<double>(s.true_beta.data(), s.true_beta.data() + s.true_beta.size());
  j["baseline_shape"] = s.baseline_shape;
  j["baseline_scale"] = s.baseline_scale;
  j["censor_rate_target"] = s.censor_rate_target;
  j["seed"] = s.seed;
  j["with_kfre_columns"] = s.with_kfre_columns;
  return j;
}

SyntheticConfig synthetic_from_json(const ordered_json& j, SyntheticConfig s) {
  check_keys(j, "inputs.synthetic.",
             {"n_subjects", "n_signal_features", "n_noise_features", "true_beta", "baseline_shape",
              "baseline_scale", "censor_rate_target", "seed", "with_kfre_columns"});
  read_field(j, "n_subjects", s.n_subjects);
  read_field(j, "n_signal_features", s.n_signal_features);
  read_field(j, "n_noise_features", s.n_noise_features);
  if (j.contains("true_beta")) {
    const auto beta = j.at("true_beta").get<std::vector<double>>();
    s.true_beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  }
  read_field(j, "baseline_shape", s.baseline_shape);
  read_field(j, "baseline_scale", s.baseline_scale);
  read_field(j, "censor_rate_target", s.censor_rate_target);
  read_field(j, "seed", s.seed);
  read_field(j, "with_kfre_columns", s.with_kfre_columns);
  return s;
}

}  // namespace

std::string to_string(BrierMode mode) {
  return mode == BrierMode::kLiteral ? "literal" : "ipcw";
}

BrierMode brier_mode_from_string(const std::string& text) {
  if (text == "literal") return BrierMode::kLiteral;
  if (text == "ipcw") return BrierMode::kIpcw;
  throw ValidationError("unknown brier mode '" + text + "' (expected literal or ipcw)");
}

std::vector<double> default_horizons_days() {
  return {365.25, 730.5, 1095.75, 1461.0, 1826.25};
}

void PipelineConfig::validate() const {
  if (top_j < 0) throw ValidationError("top_j must be >= 0");
  if (k_folds < 2) throw ValidationError("k_folds must be >= 2");
  if (!(penalizer >= 0.0) || !std::isfinite(penalizer)) {
    throw ValidationError("penalizer must be finite and >= 0");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in [0, 1]");
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
  if (explain_samples < 1) throw ValidationError("explain_samples must be >= 1");
  if (background_rows < 1) throw ValidationError("background_rows must be >= 1");
  if (kernel_coalitions < 1) throw ValidationError("kernel_coalitions must be >= 1");
  if (kernel_background < 1) throw ValidationError("kernel_background must be >= 1");
  for (double h : horizons_days) {
    if (!std::isfinite(h) || h <= 0.0) {
      throw ValidationError("horizons_days entries must be finite and positive");
    }
  }
}

TrainConfig PipelineConfig::train_config_for(Family target) const {
  TrainConfig config = default_train_config(target);
  config.logistic = hyperparameters.logistic;
  config.tree = hyperparameters.tree;
  config.forest = hyperparameters.forest;
  config.boosted = hyperparameters.boosted;
  config.mlp = target == Family::kResMlp ? hyperparameters.resmlp : hyperparameters.mlp;
  return config;
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config parse: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: top level must be a JSON object");

  PipelineConfig config;
  try {
    check_keys(j, "",
               {"family", "top_j", "k_folds", "penalizer", "tau", "seed", "jobs", "tie_rule",
                "brier_mode", "union_all_families", "horizons_days", "explain_samples",
                "background_rows", "kernel_coalitions", "kernel_background", "kfre8",
                "hyperparameters", "inputs"});
    if (j.contains("family")) config.family = family_from_string(j.at("family").get<std::string>());
    read_field(j, "top_j", config.top_j);
    read_field(j, "k_folds", config.k_folds);
    read_field(j, "penalizer", config.penalizer);
    read_field(j, "tau", config.tau);
    read_field(j, "seed", config.seed);
    read_field(j, "jobs", config.jobs);
    if (j.contains("tie_rule")) {
      config.tie_rule = tie_rule_from_string(j.at("tie_rule").get<std::string>());
    }
    if (j.contains("brier_mode")) {
      config.brier_mode = brier_mode_from_string(j.at("brier_mode").get<std::string>());
    }
    read_field(j, "union_all_families", config.union_all_families);
    read_field(j, "horizons_days", config.horizons_days);
    read_field(j, "explain_samples", config.explain_samples);
    read_field(j, "background_rows", config.background_rows);
    read_field(j, "kernel_coalitions", config.kernel_coalitions);
    read_field(j, "kernel_background", config.kernel_background);
    if (j.contains("kfre8")) config.kfre8 = kfre_from_json(j.at("kfre8"), config.kfre8);
    if (j.contains("hyperparameters")) {
      config.hyperparameters = hyper_from_json(j.at("hyperparameters"), config.hyperparameters);
    }
    if (j.contains("inputs")) {
      const auto& in = j.at("inputs");
      check_keys(in, "inputs.", {"features_csv", "survival_csv", "use_synthetic", "synthetic"});
      read_field(in, "features_csv", config.inputs.features_csv);
      read_field(in, "survival_csv", config.inputs.survival_csv);
      read_field(in, "use_synthetic", config.inputs.use_synthetic);
      if (in.contains("synthetic")) {
        config.inputs.synthetic = synthetic_from_json(in.at("synthetic"), config.inputs.synthetic);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  config.validate();
  return config;
}

std::string pipeline_config_to_json(const PipelineConfig& config) {
  ordered_json j;
  j["family"] = to_string(config.family);
  j["top_j"] = config.top_j;
  j["k_folds"] = config.k_folds;
  j["penalizer"] = config.penalizer;
  j["tau"] = config.tau;
  j["seed"] = config.seed;
  j["jobs"] = config.jobs;
  j["tie_rule"] = to_string(config.tie_rule);
  j["brier_mode"] = to_string(config.brier_mode);
  j["union_all_families"] = config.union_all_families;
  j["horizons_days"] = config.horizons_days;
  j["explain_samples"] = config.explain_samples;
  j["background_rows"] = config.background_rows;
  j["kernel_coalitions"] = config.kernel_coalitions;
  j["kernel_background"] = config.kernel_background;
  j["kfre8"] = kfre_to_json(config.kfre8);
  j["hyperparameters"] = hyper_to_json(config.hyperparameters);
  ordered_json inputs = ordered_json::object();
  inputs["features_csv"] = config.inputs.features_csv;
  inputs["survival_csv"] = config.inputs.survival_csv;
  inputs["use_synthetic"] = config.inputs.use_synthetic;
  inputs["synthetic"] = synthetic_to_json(config.inputs.synthetic);
  j["inputs"] = inputs;
  return j.dump(2) + "\n";
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return pipeline_config_from_json(buffer.str());
}

}  // namespace ckdprog
