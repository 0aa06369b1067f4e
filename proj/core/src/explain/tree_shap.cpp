#include "ckdprog/explain/tree_shap.hpp"

#include <cstdint>
#include <vector>

#include "ckdprog/common/errors.hpp"

namespace ckdprog {
namespace {

enum class Need : std::uint8_t { kFree, kFromX, kFromB };

// Factorials up to the deepest plausible path (p + q <= depth of tree); grown
// on demand.
class Factorials {
 public:
  double operator()(int n) {
    while (static_cast<int>(table_.size()) <= n)
      table_.push_back(table_.back() * static_cast<double>(table_.size()));
    return table_[static_cast<std::size_t>(n)];
  }

 private:
  std::vector<double> table_{1.0};
};

class PathWalker {
 public:
  PathWalker(const TreeModel& tree, const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& b,
             Eigen::VectorXd& phi)
      : tree_(tree), x_(x), b_(b), phi_(phi), state_(static_cast<std::size_t>(x.size()), Need::kFree) {}

  void walk(int node_index) {
    const TreeNode& node = tree_.nodes[static_cast<std::size_t>(node_index)];
    if (node.feature < 0) {
      settle_leaf(node.value);
      return;
    }
    const bool x_left = x_[node.feature] <= node.threshold;
    const bool b_left = b_[node.feature] <= node.threshold;
    if (x_left == b_left) {
      walk(x_left ? node.left : node.right);
      return;
    }
    // Diverging split: the x-branch needs the feature in the coalition, the
    // b-branch needs it out. A feature already pinned the other way makes the
    // branch unreachable.
    Need& need = state_[static_cast<std::size_t>(node.feature)];
    if (need == Need::kFree) {
      need = Need::kFromX;
      from_x_.push_back(node.feature);
      walk(x_left ? node.left : node.right);
      from_x_.pop_back();
      need = Need::kFromB;
      from_b_.push_back(node.feature);
      walk(x_left ? node.right : node.left);
      from_b_.pop_back();
      need = Need::kFree;
    } else if (need == Need::kFromX) {
      walk(x_left ? node.left : node.right);
    } else {
      walk(x_left ? node.right : node.left);
    }
  }

 private:
  void settle_leaf(double value) {
    const int p = static_cast<int>(from_x_.size());
    const int q = static_cast<int>(from_b_.size());
    if (p + q == 0) return;  // x and b share the leaf; no feature moves it
    const double denom = factorials_(p + q);
    if (p > 0) {
      const double credit = value * factorials_(p - 1) * factorials_(q) / denom;
      for (const int f : from_x_) phi_[f] += credit;
    }
    if (q > 0) {
      const double debit = value * factorials_(p) * factorials_(q - 1) / denom;
      for (const int f : from_b_) phi_[f] -= debit;
    }
  }

  const TreeModel& tree_;
  const Eigen::RowVectorXd& x_;
  const Eigen::RowVectorXd& b_;
  Eigen::VectorXd& phi_;
  std::vector<Need> state_;
  std::vector<int> from_x_;
  std::vector<int> from_b_;
  Factorials factorials_;
};

void accumulate_tree(const TreeModel& tree, const Eigen::RowVectorXd& x,
                     const Background& background, Eigen::VectorXd& phi, double scale) {
  Eigen::VectorXd tree_phi = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index r = 0; r < background.rows.rows(); ++r) {
    const Eigen::RowVectorXd b = background.rows.row(r);
    PathWalker walker(tree, x, b, tree_phi);
    walker.walk(0);
  }
  phi += (scale / static_cast<double>(background.rows.rows())) * tree_phi;
}

void check_inputs(int n_features, const Eigen::RowVectorXd& x, const Background& background) {
  background.validate();
  if (x.size() != n_features)
    throw ValidationError("input has " + std::to_string(x.size()) +
                          " features but the model expects " + std::to_string(n_features));
  if (background.rows.cols() != x.size())
    throw ValidationError("background column count does not match the input");
}

}  // namespace

Eigen::VectorXd tree_shap(const TreeModel& model, const Eigen::RowVectorXd& x,
                          const Background& background) {
  model.validate();
  check_inputs(model.n_features, x, background);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(x.size());
  accumulate_tree(model, x, background, phi, 1.0);
  return phi;
}

Eigen::VectorXd tree_shap(const ForestModel& model, const Eigen::RowVectorXd& x,
                          const Background& background) {
  if (model.trees.empty()) throw ValidationError("forest has no trees");
  check_inputs(model.n_features, x, background);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(x.size());
  const double scale = 1.0 / static_cast<double>(model.trees.size());
  for (const TreeModel& tree : model.trees) accumulate_tree(tree, x, background, phi, scale);
  return phi;
}

Eigen::VectorXd tree_shap(const BoostedModel& model, const Eigen::RowVectorXd& x,
                          const Background& background) {
  if (model.trees.empty()) throw ValidationError("boosted model has no trees");
  check_inputs(model.n_features, x, background);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(x.size());
  for (const TreeModel& tree : model.trees)
    accumulate_tree(tree, x, background, phi, model.learning_rate);
  return phi;
}

}  // namespace ckdprog
