#include "ckdprog/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ckdprog/common/errors.hpp"

namespace ckdprog {

namespace {

// Tie-aware Mann-Whitney AUROC over (score, is_positive) pairs via midranks.
double mann_whitney_auc(std::vector<std::pair<double, int>>& items) {
  std::size_t n_pos = 0;
  for (const auto& [score, label] : items) n_pos += static_cast<std::size_t>(label);
  const std::size_t n_neg = items.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ValidationError("auroc: both classes must be present");
  }
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j < items.size() && items[j].first == items[i].first) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (items[k].second == 1) rank_sum_pos += midrank;
    }
    i = j;
  }
  const double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace

double auroc(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  if (scores.size() != labels.size()) throw ValidationError("auroc: size mismatch");
  std::vector<std::pair<double, int>> items;
  items.reserve(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("auroc: labels must be 0/1");
    items.emplace_back(scores[i], labels[i]);
  }
  return mann_whitney_auc(items);
}

double concordance_index(const Eigen::VectorXd& risk, const Eigen::VectorXd& durations,
                         const Eigen::VectorXi& events, TieMode ties) {
  const Eigen::Index n = risk.size();
  if (durations.size() != n || events.size() != n) {
    throw ValidationError("concordance_index: size mismatch");
  }
  // Traverse subjects in event-time order; each observed event is compared
  // against every subject with a strictly later time.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return durations[a] < durations[b]; });

  double concordant = 0.0;
  long comparable = 0;
  for (std::size_t a = 0; a < order.size(); ++a) {
    const int i = order[a];
    if (events[i] != 1) continue;
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const int j = order[b];
      if (durations[j] <= durations[i]) continue;  // skip exact time ties
      ++comparable;
      if (risk[i] > risk[j]) {
        concordant += 1.0;
      } else if (risk[i] == risk[j] && ties == TieMode::kHalfCredit) {
        concordant += 0.5;
      }
    }
  }
  if (comparable == 0) throw ValidationError("concordance_index: no comparable pairs");
  return concordant / static_cast<double>(comparable);
}

std::vector<std::pair<double, double>> censoring_kaplan_meier(const Eigen::VectorXd& durations,
                                                              const Eigen::VectorXi& events) {
  std::vector<int> order(static_cast<std::size_t>(durations.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return durations[a] < durations[b]; });

  std::vector<std::pair<double, double>> curve;
  double surv = 1.0;
  std::size_t pos = 0;
  double at_risk = static_cast<double>(durations.size());
  while (pos < order.size()) {
    const double t = durations[order[pos]];
    std::size_t end = pos;
    int censorings = 0;
    int total = 0;
    while (end < order.size() && durations[order[end]] == t) {
      if (events[order[end]] == 0) ++censorings;
      ++total;
      ++end;
    }
    if (censorings > 0) {
      surv *= 1.0 - static_cast<double>(censorings) / at_risk;
      curve.emplace_back(t, surv);
    }
    at_risk -= static_cast<double>(total);
    pos = end;
  }
  return curve;
}

namespace {

// Step-function evaluation: value of the censoring survival curve at time t
// (right-continuous); pass t_minus=true for the left limit G(t-).
double km_eval(const std::vector<std::pair<double, double>>& curve, double t, bool t_minus) {
  double value = 1.0;
  for (const auto& [time, surv] : curve) {
    if (t_minus ? (time < t) : (time <= t)) {
      value = surv;
    } else {
      break;
    }
  }
  return value;
}

}  // namespace

double brier_score(const SurvivalFn& survival, const SurvivalDataset& data, double t,
                   BrierMode mode) {
  if (!(t > 0.0)) throw ValidationError("brier_score: horizon must be positive");
  const Eigen::Index n = data.size();
  if (n == 0) throw ValidationError("brier_score: empty dataset");

  if (mode == BrierMode::kLiteral) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double outcome = data.durations[i] > t ? 1.0 : 0.0;
      const double diff = outcome - survival(i, t);
      sum += diff * diff;
    }
    return sum / static_cast<double>(n);
  }

  // IPCW weighting (Graf et al.): events by t weight 1/G(T-), survivors past
  // t weight 1/G(t), subjects censored by t contribute zero.
  const auto censor_curve = censoring_kaplan_meier(data.durations, data.events);
  const double g_at_t = km_eval(censor_curve, t, /*t_minus=*/false);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s_hat = survival(i, t);
    if (data.durations[i] <= t && data.events[i] == 1) {
      const double g = km_eval(censor_curve, data.durations[i], /*t_minus=*/true);
      if (g > 0.0) sum += (0.0 - s_hat) * (0.0 - s_hat) / g;
    } else if (data.durations[i] > t) {
      if (g_at_t > 0.0) sum += (1.0 - s_hat) * (1.0 - s_hat) / g_at_t;
    }
  }
  return sum / static_cast<double>(n);
}

std::vector<DynamicAucPoint> dynamic_auc(const Eigen::VectorXd& risk,
                                         const Eigen::VectorXd& durations,
                                         const Eigen::VectorXi& events,
                                         const std::vector<double>& eval_times) {
  const Eigen::Index n = risk.size();
  if (durations.size() != n || events.size() != n) {
    throw ValidationError("dynamic_auc: size mismatch");
  }
  std::vector<DynamicAucPoint> curve;
  curve.reserve(eval_times.size());
  for (const double t : eval_times) {
    std::vector<std::pair<double, int>> items;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (durations[i] <= t && events[i] == 1) {
        items.emplace_back(risk[i], 1);  // case: event by t
      } else if (durations[i] > t) {
        items.emplace_back(risk[i], 0);  // control: still event-free past t
      }
      // censored with T <= t: excluded at this time
    }
    DynamicAucPoint point;
    point.time = t;
    try {
      point.value = mann_whitney_auc(items);
      point.valid = true;
    } catch (const ValidationError&) {
      point.valid = false;
    }
    curve.push_back(point);
  }
  return curve;
}

}  // namespace ckdprog
