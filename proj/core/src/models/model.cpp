#include "ckdprog/models/model.hpp"

#include "ckdprog/common/errors.hpp"

namespace ckdprog {

std::string to_string(Family family) {
  switch (family) {
    case Family::kLr: return "lr";
    case Family::kDt: return "dt";
    case Family::kRf: return "rf";
    case Family::kGbt: return "gbt";
    case Family::kMlp: return "mlp";
    case Family::kResMlp: return "resmlp";
    case Family::kBaseline: return "baseline";
  }
  throw ValidationError("unknown family");
}

Family family_from_string(const std::string& text) {
  if (text == "lr") return Family::kLr;
  if (text == "dt") return Family::kDt;
  if (text == "rf") return Family::kRf;
  if (text == "gbt") return Family::kGbt;
  if (text == "mlp") return Family::kMlp;
  if (text == "resmlp") return Family::kResMlp;
  if (text == "baseline") return Family::kBaseline;
  throw ValidationError("unknown classifier family: '" + text +
                        "' (expected lr, dt, rf, gbt, mlp, resmlp, or baseline)");
}

Family model_family(const AnyModel& model) {
  return std::visit(
      [](const auto& m) -> Family {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) return Family::kLr;
        if constexpr (std::is_same_v<T, TreeModel>) return Family::kDt;
        if constexpr (std::is_same_v<T, ForestModel>) return Family::kRf;
        if constexpr (std::is_same_v<T, BoostedModel>) return Family::kGbt;
        if constexpr (std::is_same_v<T, MlpModel>)
          return m.arch == MlpArch::kResidual ? Family::kResMlp : Family::kMlp;
      },
      model);
}

Eigen::VectorXd predict_proba(const AnyModel& model, const Eigen::MatrixXd& X) {
  return std::visit(
      [&](const auto& m) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) return linear_predict_proba(m, X);
        if constexpr (std::is_same_v<T, TreeModel>) return m.predict(X);
        if constexpr (std::is_same_v<T, ForestModel>) return m.predict_proba(X);
        if constexpr (std::is_same_v<T, BoostedModel>) return m.predict_proba(X);
        if constexpr (std::is_same_v<T, MlpModel>) return m.predict_proba(X);
      },
      model);
}

Eigen::VectorXd predict_margin(const AnyModel& model, const Eigen::MatrixXd& X) {
  return std::visit(
      [&](const auto& m) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) return linear_predict_margin(m, X);
        if constexpr (std::is_same_v<T, TreeModel>) return m.predict(X);
        if constexpr (std::is_same_v<T, ForestModel>) return m.predict_proba(X);
        if constexpr (std::is_same_v<T, BoostedModel>) return m.predict_margin(X);
        if constexpr (std::is_same_v<T, MlpModel>) return m.predict_margin(X);
      },
      model);
}

bool margin_is_log_odds(Family family) {
  return family == Family::kLr || family == Family::kGbt || family == Family::kMlp ||
         family == Family::kResMlp;
}

int classify(const AnyModel& model, const Eigen::RowVectorXd& x, double tau) {
  Eigen::MatrixXd row(1, x.size());
  row.row(0) = x;
  const double p = predict_proba(model, row)[0];
  return p >= tau ? 1 : 0;
}

TrainConfig default_train_config(Family family) {
  TrainConfig config;
  config.family = family;
  if (family == Family::kMlp) config.mlp = plain_mlp_defaults();
  if (family == Family::kResMlp) config.mlp = residual_mlp_defaults();
  return config;
}

AnyModel train_model(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                     const TrainConfig& config) {
  switch (config.family) {
    case Family::kLr:
      return train_logistic(X, y, config.logistic);
    case Family::kDt:
      return train_tree(X, y, config.tree);
    case Family::kRf: {
      ForestConfig fc = config.forest;
      fc.seed = config.seed;
      return train_forest(X, y, fc);
    }
    case Family::kGbt: {
      BoostedConfig bc = config.boosted;
      bc.seed = config.seed;
      return train_gbt(X, y, bc);
    }
    case Family::kMlp:
    case Family::kResMlp: {
      MlpConfig mc = config.mlp;
      mc.arch = config.family == Family::kResMlp ? MlpArch::kResidual : MlpArch::kPlain;
      mc.seed = config.seed;
      return train_mlp(X, y, mc);
    }
    case Family::kBaseline:
      break;
  }
  throw ValidationError("the baseline family has no classifier to train");
}

}  // namespace ckdprog
