#include "ckdprog/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ckdprog/common/errors.hpp"

namespace ckdprog {
namespace {

// -(w1*log(p) + w0*log(1-p)) with p = w1/(w0+w1); the 0*log(0) limit is 0.
double log_loss_impurity(double w0, double w1) {
  const double total = w0 + w1;
  if (total <= 0.0) return 0.0;
  double impurity = 0.0;
  if (w1 > 0.0) impurity -= w1 * std::log(w1 / total);
  if (w0 > 0.0) impurity -= w0 * std::log(w0 / total);
  return impurity;
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
              const Eigen::VectorXd& weight, const TreeConfig& config, int max_features, Rng* rng)
      : x_(X), y_(y), weight_(weight), config_(config), max_features_(max_features), rng_(rng) {}

  int build(std::vector<int> rows, int depth, std::vector<TreeNode>& nodes) {
    double w0 = 0.0, w1 = 0.0;
    for (const int i : rows) (y_[i] == 1 ? w1 : w0) += weight_[i];

    const int node_index = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[node_index].n_samples = static_cast<int>(rows.size());
    const double leaf_value = (w0 + w1) > 0.0 ? w1 / (w0 + w1) : 0.0;

    const bool pure = w0 == 0.0 || w1 == 0.0;
    if (pure || depth >= config_.max_depth ||
        static_cast<int>(rows.size()) < config_.min_samples_split) {
      nodes[node_index].value = leaf_value;
      return node_index;
    }

    const SplitChoice split = best_split(rows, log_loss_impurity(w0, w1));
    if (!split.found) {
      nodes[node_index].value = leaf_value;
      return node_index;
    }

    std::vector<int> left_rows, right_rows;
    for (const int i : rows) {
      (x_(i, split.feature) <= split.threshold ? left_rows : right_rows).push_back(i);
    }
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
  SplitChoice best_split(const std::vector<int>& rows, double parent_impurity) const {
    std::vector<int> features;
    const int n_features = static_cast<int>(x_.cols());
    if (max_features_ > 0 && max_features_ < n_features) {
      features = rng_->sample_without_replacement(n_features, max_features_);
    } else {
      features.resize(n_features);
      std::iota(features.begin(), features.end(), 0);
    }

    SplitChoice best;
    std::vector<std::pair<double, int>> ordered(rows.size());
    for (const int f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        ordered[i] = {x_(rows[i], f), rows[i]};
      std::sort(ordered.begin(), ordered.end());

      double left_w0 = 0.0, left_w1 = 0.0;
      double right_w0 = 0.0, right_w1 = 0.0;
      for (const int i : rows) (y_[i] == 1 ? right_w1 : right_w0) += weight_[i];

      for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
        const int row = ordered[i].second;
        const double w = weight_[row];
        if (y_[row] == 1) {
          left_w1 += w;
          right_w1 -= w;
        } else {
          left_w0 += w;
          right_w0 -= w;
        }
        if (ordered[i].first == ordered[i + 1].first) continue;
        const int n_left = static_cast<int>(i) + 1;
        const int n_right = static_cast<int>(ordered.size()) - n_left;
        if (n_left < config_.min_samples_leaf || n_right < config_.min_samples_leaf) continue;

        const double gain = parent_impurity - log_loss_impurity(left_w0, left_w1) -
                            log_loss_impurity(right_w0, right_w1);
        if (gain >= 0.0 && (!best.found || gain > best.gain)) {
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
  const Eigen::VectorXi& y_;
  const Eigen::VectorXd& weight_;
  const TreeConfig& config_;
  int max_features_;
  Rng* rng_;
};

}  // namespace

double TreeModel::predict_one(const Eigen::RowVectorXd& x) const {
  if (x.size() != n_features)
    throw ValidationError("input has " + std::to_string(x.size()) + " features but the tree expects " +
                          std::to_string(n_features));
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

Eigen::VectorXd TreeModel::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict_one(X.row(i));
  return out;
}

void TreeModel::validate() const {
  if (nodes.empty()) throw ValidationError("tree has no nodes");
  for (const TreeNode& node : nodes) {
    if (node.feature >= 0) {
      if (node.feature >= n_features) throw ValidationError("split feature out of range");
      if (node.left < 0 || node.right < 0 || node.left >= static_cast<int>(nodes.size()) ||
          node.right >= static_cast<int>(nodes.size()))
        throw ValidationError("internal node has invalid children");
    }
  }
}

TreeModel train_tree(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const TreeConfig& config) {
  return grow_classification_tree(X, y, Eigen::VectorXd::Ones(X.rows()), config, 0, nullptr);
}

TreeModel grow_classification_tree(const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                                   const Eigen::VectorXd& sample_weight, const TreeConfig& config,
                                   int max_features, Rng* rng) {
  if (X.rows() == 0) throw ValidationError("cannot train on an empty matrix");
  if (y.size() != X.rows()) throw ValidationError("label count does not match row count");
  if (sample_weight.size() != X.rows())
    throw ValidationError("sample weight count does not match row count");
  if (!X.allFinite()) throw ValidationError("feature matrix contains non-finite values");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 0 && y[i] != 1) throw ValidationError("labels must be 0 or 1");
  if (config.max_depth < 1) throw ValidationError("max_depth must be >= 1");
  if (config.min_samples_split < 2) throw ValidationError("min_samples_split must be >= 2");
  if (config.min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be >= 1");
  if (max_features > 0 && max_features < X.cols() && rng == nullptr)
    throw ValidationError("feature subsampling requires a random generator");

  // Rows with zero weight (absent from a bootstrap draw) do not reach the builder.
  std::vector<int> rows;
  rows.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    if (sample_weight[i] > 0.0) rows.push_back(static_cast<int>(i));
  if (rows.empty()) throw ValidationError("all sample weights are zero");

  TreeModel model;
  model.n_features = static_cast<int>(X.cols());
  TreeBuilder builder(X, y, sample_weight, config, max_features, rng);
  builder.build(std::move(rows), 0, model.nodes);
  return model;
}

}  // namespace ckdprog
