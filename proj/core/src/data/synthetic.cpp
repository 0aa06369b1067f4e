#include "ckdprog/data/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/rng.hpp"

namespace ckdprog {

void SyntheticConfig::validate() const {
  if (n_subjects < 1) throw ValidationError("SyntheticConfig: n_subjects must be positive");
  if (n_signal_features != static_cast<int>(true_beta.size())) {
    throw ValidationError("SyntheticConfig: n_signal_features must equal true_beta length");
  }
  if (n_noise_features < 0) throw ValidationError("SyntheticConfig: n_noise_features negative");
  if (n_signal_features + n_noise_features + (with_kfre_columns ? 8 : 0) < 1) {
    throw ValidationError("SyntheticConfig: cohort needs at least one feature column");
  }
  if (!(censor_rate_target > 0.0 && censor_rate_target < 1.0)) {
    throw ValidationError("SyntheticConfig: censor_rate_target must lie strictly inside (0,1)");
  }
  if (!(baseline_shape > 0.0) || !(baseline_scale > 0.0)) {
    throw ValidationError("SyntheticConfig: Weibull parameters must be positive");
  }
}

std::string SyntheticGroundTruth::to_json() const {
  nlohmann::ordered_json j;
  j["true_beta"] = std::vector<double>(true_beta.data(), true_beta.data() + true_beta.size());
  j["seed"] = seed;
  j["censor_fraction"] = censor_fraction;
  return j.dump(2) + "\n";
}

const std::vector<std::string>& synthetic_kfre_column_names() {
  static const std::vector<std::string> names = {
      "kfre_age",     "kfre_sex",         "kfre_egfr",        "kfre_uacr",
      "kfre_calcium", "kfre_phosphorus",  "kfre_bicarbonate", "kfre_albumin"};
  return names;
}

SyntheticCohort generate_synthetic_cohort(const SyntheticConfig& config) {
  config.validate();
  const int n = config.n_subjects;
  const int d_signal = config.n_signal_features;
  const int d_noise = config.n_noise_features;
  const int d_kfre = config.with_kfre_columns ? 8 : 0;
  const int d = d_signal + d_noise + d_kfre;

  SyntheticCohort cohort;
  FeatureMatrix& features = cohort.features;
  features.values.resize(n, d);
  features.column_names.reserve(static_cast<std::size_t>(d));
  features.column_kinds.assign(static_cast<std::size_t>(d), ColumnKind::kLabAggregate);
  for (int j = 0; j < d_signal; ++j) features.column_names.push_back("signal_" + std::to_string(j));
  for (int j = 0; j < d_noise; ++j) features.column_names.push_back("noise_" + std::to_string(j));
  if (config.with_kfre_columns) {
    const auto& kfre = synthetic_kfre_column_names();
    features.column_names.insert(features.column_names.end(), kfre.begin(), kfre.end());
  }
  features.row_ids.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) features.row_ids.push_back("S" + std::to_string(i + 1));

  Rng rng(derive_seed(config.seed, /*stream=*/0xC0F0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) features.values(i, j) = rng.normal();
  }

  // Inverse-transform sampling of the Weibull PH model:
  //   S(t|x) = exp(-(t/scale)^shape * exp(beta^T x))
  //   T = scale * (E / exp(beta^T x))^(1/shape),  E ~ Exp(1)
  Eigen::VectorXd linear_predictor = Eigen::VectorXd::Zero(n);
  if (d_signal > 0) {
    linear_predictor = features.values.leftCols(d_signal) * config.true_beta;
  }
  Eigen::VectorXd event_time(n);
  for (int i = 0; i < n; ++i) {
    const double e = rng.exponential(1.0);
    event_time[i] =
        config.baseline_scale * std::pow(e / std::exp(linear_predictor[i]), 1.0 / config.baseline_shape);
  }

  // Exponential censor times share one uniform draw per subject so the
  // realized censor fraction is monotone in the rate; bisection then
  // calibrates the rate against the target.
  Eigen::VectorXd censor_unit(n);  // Exp(1) draws; censor time = unit / rate
  for (int i = 0; i < n; ++i) censor_unit[i] = rng.exponential(1.0);

  const auto censored_fraction = [&](double rate) {
    int censored = 0;
    for (int i = 0; i < n; ++i) {
      if (censor_unit[i] / rate < event_time[i]) ++censored;
    }
    return static_cast<double>(censored) / static_cast<double>(n);
  };

  double lo = 1e-12, hi = 1e-12;
  while (censored_fraction(hi) < config.censor_rate_target && hi < 1e12) hi *= 2.0;
  double rate = hi;
  for (int iter = 0; iter < 200; ++iter) {
    rate = 0.5 * (lo + hi);
    if (censored_fraction(rate) < config.censor_rate_target) {
      lo = rate;
    } else {
      hi = rate;
    }
  }
  const double realized = censored_fraction(rate);
  const double achievable = std::max(0.02, 2.0 / static_cast<double>(n));
  if (std::fabs(realized - config.censor_rate_target) > achievable) {
    throw std::runtime_error(
        "generate_synthetic_cohort: censoring calibration missed target " +
        std::to_string(config.censor_rate_target) + " (realized " + std::to_string(realized) + ")");
  }

  SurvivalDataset& survival = cohort.survival;
  survival.durations.resize(n);
  survival.events.resize(n);
  cohort.progressed.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double censor_time = censor_unit[i] / rate;
    const bool observed = event_time[i] <= censor_time;
    survival.durations[i] = std::max(kZeroDurationShiftDays, observed ? event_time[i] : censor_time);
    survival.events[i] = observed ? 1 : 0;
    cohort.progressed[static_cast<std::size_t>(i)] = observed ? 1 : 0;
  }
  survival.features = features;

  cohort.truth.true_beta = config.true_beta;
  cohort.truth.seed = config.seed;
  cohort.truth.censor_fraction = realized;
  cohort.truth.censor_rate = rate;
  return cohort;
}

}  // namespace ckdprog
