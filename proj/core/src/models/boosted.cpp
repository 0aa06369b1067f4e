#include "ckdprog/models/boosted.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/models/linear.hpp"

namespace ckdprog {
namespace {

constexpr std::uint64_t kBoostStream = 0x47425354;

struct GradHess {
  const Eigen::VectorXd& g;
  const Eigen::VectorXd& h;
};

class BoostTreeBuilder {
 public:
  BoostTreeBuilder(const Eigen::MatrixXd& X, GradHess stats, const BoostedConfig& config,
                   const std::vector<std::vector<int>>& level_features)
      : x_(X), stats_(stats), config_(config), level_features_(level_features) {}

  int build(std::vector<int> rows, int depth, std::vector<TreeNode>& nodes) {
    double g_sum = 0.0, h_sum = 0.0;
    for (const int i : rows) {
      g_sum += stats_.g[i];
      h_sum += stats_.h[i];
    }

    const int node_index = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[node_index].n_samples = static_cast<int>(rows.size());
    nodes[node_index].value = -g_sum / (h_sum + config_.reg_lambda);

    if (depth >= config_.max_depth) return node_index;

    const SplitChoice split = best_split(rows, depth, g_sum, h_sum);
    if (!split.found) return node_index;

    std::vector<int> left_rows, right_rows;
    for (const int i : rows)
      (x_(i, split.feature) <= split.threshold ? left_rows : right_rows).push_back(i);
    rows.clear();
    rows.shrink_to_fit();

    nodes[node_index].feature = split.feature;
    nodes[node_index].threshold = split.threshold;
    const int left = build(std::move(left_rows), depth + 1, nodes);
    const int right = build(std::move(right_rows), depth + 1, nodes);
    nodes[node_index].left = left;
    nodes[node_index].right = right;
    return node_index;
  }

 private:
  struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  double leaf_score(double g, double h) const { return g * g / (h + config_.reg_lambda); }

  SplitChoice best_split(const std::vector<int>& rows, int depth, double g_sum,
                         double h_sum) const {
    SplitChoice best;
    const double parent_score = leaf_score(g_sum, h_sum);
    std::vector<std::pair<double, int>> ordered(rows.size());
    for (const int f : level_features_[static_cast<std::size_t>(depth)]) {
      for (std::size_t i = 0; i < rows.size(); ++i) ordered[i] = {x_(rows[i], f), rows[i]};
      std::sort(ordered.begin(), ordered.end());

      double gl = 0.0, hl = 0.0;
      for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
        const int row = ordered[i].second;
        gl += stats_.g[row];
        hl += stats_.h[row];
        if (ordered[i].first == ordered[i + 1].first) continue;
        const double gr = g_sum - gl;
        const double hr = h_sum - hl;
        if (hl < config_.min_child_weight || hr < config_.min_child_weight) continue;
        const double gain =
            0.5 * (leaf_score(gl, hl) + leaf_score(gr, hr) - parent_score) - config_.gamma;
        if (gain > 0.0 && (!best.found || gain > best.gain)) {
          best.found = true;
          best.feature = f;
          best.threshold = 0.5 * (ordered[i].first + ordered[i + 1].first);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  GradHess stats_;
  const BoostedConfig& config_;
  const std::vector<std::vector<int>>& level_features_;
};

std::vector<int> subsample_columns(const std::vector<int>& pool, double rate, Rng& rng) {
  if (rate >= 1.0) return pool;
  const int k = std::max(1, static_cast<int>(rate * static_cast<double>(pool.size())));
  const std::vector<int> picks = rng.sample_without_replacement(static_cast<int>(pool.size()), k);
  std::vector<int> out;
  out.reserve(picks.size());
  for (const int p : picks) out.push_back(pool[static_cast<std::size_t>(p)]);
  return out;
}

}  // namespace

Eigen::VectorXd BoostedModel::predict_margin(const Eigen::MatrixXd& X) const {
  if (X.cols() != n_features)
    throw ValidationError("matrix has " + std::to_string(X.cols()) +
                          " columns but the model expects " + std::to_string(n_features));
  Eigen::VectorXd margin = Eigen::VectorXd::Constant(X.rows(), base_score);
  for (const TreeModel& tree : trees) margin += learning_rate * tree.predict(X);
  return margin;
}

Eigen::VectorXd BoostedModel::predict_proba(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd margin = predict_margin(X);
  for (Eigen::Index i = 0; i < margin.size(); ++i) margin[i] = sigmoid(margin[i]);
  return margin;
}

BoostedModel train_gbt(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                       const BoostedConfig& config) {
  if (X.rows() == 0) throw ValidationError("cannot train on an empty matrix");
  if (y.size() != X.rows()) throw ValidationError("label count does not match row count");
  if (!X.allFinite()) throw ValidationError("feature matrix contains non-finite values");
  if (config.n_estimators < 1) throw ValidationError("n_estimators must be >= 1");
  if (config.max_depth < 1) throw ValidationError("max_depth must be >= 1");
  if (config.learning_rate <= 0.0) throw ValidationError("learning_rate must be > 0");
  if (config.subsample <= 0.0 || config.subsample > 1.0)
    throw ValidationError("subsample must be in (0, 1]");
  if (config.colsample_bytree <= 0.0 || config.colsample_bytree > 1.0 ||
      config.colsample_bylevel <= 0.0 || config.colsample_bylevel > 1.0)
    throw ValidationError("colsample rates must be in (0, 1]");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 0 && y[i] != 1) throw ValidationError("labels must be 0 or 1");

  const int n = static_cast<int>(X.rows());
  const int n_features = static_cast<int>(X.cols());

  BoostedModel model;
  model.n_features = n_features;
  model.learning_rate = config.learning_rate;
  const double rate =
      std::clamp(static_cast<double>(y.sum()) / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
  model.base_score = std::log(rate / (1.0 - rate));

  Eigen::VectorXd margin = Eigen::VectorXd::Constant(n, model.base_score);
  Eigen::VectorXd g(n), h(n);

  std::vector<int> all_features(static_cast<std::size_t>(n_features));
  std::iota(all_features.begin(), all_features.end(), 0);

  for (int round = 0; round < config.n_estimators; ++round) {
    Rng rng(derive_seed(config.seed, kBoostStream, static_cast<std::uint64_t>(round)));

    for (int i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      g[i] = p - static_cast<double>(y[i]);
      h[i] = p * (1.0 - p);
    }

    std::vector<int> rows;
    if (config.subsample < 1.0) {
      const int k = std::max(1, static_cast<int>(config.subsample * n));
      rows = rng.sample_without_replacement(n, k);
    } else {
      rows.resize(static_cast<std::size_t>(n));
      std::iota(rows.begin(), rows.end(), 0);
    }

    double h_total = 0.0;
    for (const int i : rows) h_total += h[i];
    if (h_total <= 1e-12) break;  // predictions saturated; nothing left to fit

    const std::vector<int> tree_features =
        subsample_columns(all_features, config.colsample_bytree, rng);
    std::vector<std::vector<int>> level_features(static_cast<std::size_t>(config.max_depth));
    for (int d = 0; d < config.max_depth; ++d)
      level_features[static_cast<std::size_t>(d)] =
          subsample_columns(tree_features, config.colsample_bylevel, rng);

    TreeModel tree;
    tree.n_features = n_features;
    BoostTreeBuilder builder(X, {g, h}, config, level_features);
    builder.build(std::move(rows), 0, tree.nodes);

    margin += config.learning_rate * tree.predict(X);
    model.trees.push_back(std::move(tree));
  }

  if (model.trees.empty())
    throw ConvergenceError("boosting produced no trees; hessians were degenerate at round 0", 0.0,
                           0);
  return model;
}

}  // namespace ckdprog
