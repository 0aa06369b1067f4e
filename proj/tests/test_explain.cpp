#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/rng.hpp"
#include "ckdprog/explain/exact.hpp"
#include "ckdprog/explain/kernel_shap.hpp"
#include "ckdprog/explain/linear_shap.hpp"
#include "ckdprog/explain/tree_shap.hpp"
#include "ckdprog/models/boosted.hpp"
#include "ckdprog/models/forest.hpp"
#include "ckdprog/models/mlp.hpp"
#include "ckdprog/models/tree.hpp"

using namespace ckdprog;

namespace {

Background random_background(Rng& rng, int k, int n) {
  Background bg;
  bg.rows.resize(k, n);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < n; ++j) bg.rows(i, j) = rng.normal();
  }
  return bg;
}

Eigen::RowVectorXd random_row(Rng& rng, int n) {
  Eigen::RowVectorXd x(n);
  for (int j = 0; j < n; ++j) x(j) = rng.normal();
  return x;
}

void random_training(Rng& rng, int rows, int n, Eigen::MatrixXd& X, Eigen::VectorXi& y) {
  X.resize(rows, n);
  y.resize(rows);
  for (int i = 0; i < rows; ++i) {
    double score = 0.0;
    for (int j = 0; j < n; ++j) {
      X(i, j) = rng.normal();
      score += (j % 2 == 0 ? 1.0 : -0.7) * X(i, j);
    }
    y(i) = score + 0.5 * rng.normal() > 0.0 ? 1 : 0;
  }
  if (y.sum() == 0) y(0) = 1;
  if (y.sum() == y.size()) y(0) = 0;
}

}  // namespace

TEST_CASE("exact shapley zeroes out ignored features") {
  Rng rng(1);
  const Background bg = random_background(rng, 4, 3);
  const Eigen::RowVectorXd x = random_row(rng, 3);
  const ModelFn fn = [](const Eigen::RowVectorXd& row) { return row(0) + 2.0 * row(1); };
  const Eigen::VectorXd phi = exact_shapley(fn, x, bg);
  CHECK(std::abs(phi(2)) <= 1e-12);
}

TEST_CASE("exact shapley respects symmetry") {
  Background bg;
  bg.rows.resize(2, 2);
  bg.rows << 0.3, 0.3, -1.1, -1.1;  // both columns identical
  Eigen::RowVectorXd x(2);
  x << 0.8, 0.8;
  const ModelFn fn = [](const Eigen::RowVectorXd& row) { return row(0) + row(1); };
  const Eigen::VectorXd phi = exact_shapley(fn, x, bg);
  CHECK(phi(0) == doctest::Approx(phi(1)).epsilon(1e-12));
}

TEST_CASE("exact shapley matches the linear closed form") {
  Eigen::VectorXd w(3);
  w << 2.0, -1.0, 0.5;
  Background bg;
  bg.rows.resize(1, 3);
  bg.rows << 0.4, -0.2, 1.5;
  Eigen::RowVectorXd x(3);
  x << 1.0, 0.7, -0.3;
  const ModelFn fn = [&](const Eigen::RowVectorXd& row) { return w.dot(row.transpose()); };
  const Eigen::VectorXd phi = exact_shapley(fn, x, bg);
  for (int j = 0; j < 3; ++j) {
    CHECK(phi(j) == doctest::Approx(w(j) * (x(j) - bg.rows(0, j))).epsilon(1e-10));
  }
}

TEST_CASE("exact shapley refuses oversized inputs") {
  Rng rng(2);
  const Background bg = random_background(rng, 1, 21);
  const Eigen::RowVectorXd x = random_row(rng, 21);
  const ModelFn fn = [](const Eigen::RowVectorXd& row) { return row.sum(); };
  CHECK_THROWS_AS(exact_shapley(fn, x, bg), CapacityError);
}

TEST_CASE("linear shap centering, oracle match, and homogeneity") {
  Rng rng(3);
  LinearModel model;
  model.weights = Eigen::VectorXd(5);
  model.weights << 1.2, -0.4, 0.0, 2.5, -1.7;
  model.intercept = 0.3;
  const Background bg = random_background(rng, 6, 5);

  const Eigen::RowVectorXd mean_row = bg.rows.colwise().mean();
  CHECK(linear_shap(model, mean_row, bg).cwiseAbs().maxCoeff() <= 1e-12);

  const Eigen::RowVectorXd x = random_row(rng, 5);
  const ModelFn margin = [&](const Eigen::RowVectorXd& row) {
    return model.weights.dot(row.transpose()) + model.intercept;
  };
  const Eigen::VectorXd phi = linear_shap(model, x, bg);
  const Eigen::VectorXd oracle = exact_shapley(margin, x, bg);
  CHECK((phi - oracle).cwiseAbs().maxCoeff() <= 1e-10);

  LinearModel doubled = model;
  doubled.weights *= 2.0;
  CHECK((linear_shap(doubled, x, bg) - 2.0 * phi).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("tree shap on a bare stump is all zeros") {
  TreeModel stump;
  stump.n_features = 3;
  stump.nodes = {{-1, 0.0, -1, -1, 0.7, 10}};
  Rng rng(4);
  const Background bg = random_background(rng, 3, 3);
  const Eigen::RowVectorXd x = random_row(rng, 3);
  CHECK(tree_shap(stump, x, bg).cwiseAbs().maxCoeff() == 0.0);
  const ModelFn fn = [&](const Eigen::RowVectorXd& row) { return stump.predict_one(row); };
  CHECK(expected_value(fn, bg) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("tree shap matches the enumeration oracle") {
  Rng rng(5);
  Eigen::MatrixXd X;
  Eigen::VectorXi y;
  random_training(rng, 40, 2, X, y);
  const TreeModel tree = train_tree(X, y, {2, 2, 1});
  const Background bg = random_background(rng, 4, 2);
  const ModelFn fn = [&](const Eigen::RowVectorXd& row) { return tree.predict_one(row); };
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::RowVectorXd x = random_row(rng, 2);
    const Eigen::VectorXd phi = tree_shap(tree, x, bg);
    const Eigen::VectorXd oracle = exact_shapley(fn, x, bg);
    CHECK((phi - oracle).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("ensemble attributions add across members") {
  Rng rng(6);
  Eigen::MatrixXd X;
  Eigen::VectorXi y;
  random_training(rng, 60, 3, X, y);
  const Background bg = random_background(rng, 3, 3);
  const Eigen::RowVectorXd x = random_row(rng, 3);

  ForestConfig fc;
  fc.n_estimators = 4;
  fc.max_depth = 3;
  fc.min_samples_split = 4;
  fc.min_samples_leaf = 2;
  fc.seed = 8;
  const ForestModel forest = train_forest(X, y, fc);
  Eigen::VectorXd member_mean = Eigen::VectorXd::Zero(3);
  for (const TreeModel& tree : forest.trees) member_mean += tree_shap(tree, x, bg);
  member_mean /= static_cast<double>(forest.trees.size());
  CHECK((tree_shap(forest, x, bg) - member_mean).cwiseAbs().maxCoeff() <= 1e-12);

  BoostedConfig bc;
  bc.n_estimators = 4;
  bc.max_depth = 2;
  bc.gamma = 0.0;
  bc.subsample = 1.0;
  bc.colsample_bytree = 1.0;
  bc.colsample_bylevel = 1.0;
  const BoostedModel boosted = train_gbt(X, y, bc);
  Eigen::VectorXd member_sum = Eigen::VectorXd::Zero(3);
  for (const TreeModel& tree : boosted.trees) member_sum += tree_shap(tree, x, bg);
  member_sum *= boosted.learning_rate;
  CHECK((tree_shap(boosted, x, bg) - member_sum).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("kernel shap with full enumeration recovers linear attributions") {
  Rng rng(7);
  LinearModel model;
  model.weights = Eigen::VectorXd(4);
  model.weights << 0.9, -1.3, 0.2, 0.5;
  model.intercept = -0.1;
  const Background bg = random_background(rng, 5, 4);
  const Eigen::RowVectorXd x = random_row(rng, 4);
  const ModelFn margin = [&](const Eigen::RowVectorXd& row) {
    return model.weights.dot(row.transpose()) + model.intercept;
  };
  const Eigen::VectorXd phi = kernel_shap(margin, x, bg, 1 << 4, 9);
  CHECK((phi - linear_shap(model, x, bg)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("kernel shap enforces efficiency even under sampling") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(3, 7));
    const Background bg = random_background(rng, 3, n);
    const Eigen::RowVectorXd x = random_row(rng, n);
    const ModelFn fn = [n](const Eigen::RowVectorXd& row) {
      double v = std::sin(row(0)) + 0.5 * row(n - 1) * row(n - 1);
      for (int j = 0; j < n; ++j) v += 0.2 * row(j);
      return v;
    };
    const int budget = n + 2 + static_cast<int>(rng.uniform_int(0, n));
    const Eigen::VectorXd phi = kernel_shap(fn, x, bg, budget, rng.next_u64());
    const double gap = phi.sum() - (fn(x) - expected_value(fn, bg));
    CHECK(std::abs(gap) <= 1e-10);
  }
  const Background bg = random_background(rng, 2, 5);
  CHECK_THROWS_AS(kernel_shap([](const Eigen::RowVectorXd& r) { return r.sum(); },
                              random_row(rng, 5), bg, 5, 1),
                  ValidationError);
}

TEST_CASE("kernel shap matches exact shapley on a network with full enumeration") {
  MlpConfig config;
  config.hidden_dims = {6, 4};
  config.dropout_rate = 0.0;
  MlpModel model = make_mlp(8, config, 31);
  Rng rng(9);
  Eigen::VectorXd theta = get_parameters(model);
  for (int i = 0; i < theta.size(); ++i) theta(i) = 0.5 * rng.normal();
  set_parameters(model, theta);

  const Background bg = random_background(rng, 4, 8);
  const Eigen::RowVectorXd x = random_row(rng, 8);
  const ModelFn fn = [&](const Eigen::RowVectorXd& row) {
    return model.predict_margin(row)(0);
  };
  const Eigen::VectorXd phi = kernel_shap(fn, x, bg, 256, 5);
  const Eigen::VectorXd oracle = exact_shapley(fn, x, bg);
  CHECK((phi - oracle).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("mean abs ranking sorts by magnitude with name tie-breaks") {
  AttributionMatrix attr;
  attr.feature_names = {"mid", "zeta", "alpha"};
  attr.values.resize(2, 3);
  attr.values << 1.0, -2.0, 1.0, -3.0, 0.0, -1.0;
  const FeatureRanking ranking = mean_abs_ranking(attr);
  REQUIRE(ranking.size() == 3);
  CHECK(ranking[0].name == "mid");
  CHECK(ranking[0].mean_abs_attribution == doctest::Approx(2.0));
  CHECK(ranking[1].name == "alpha");  // ties at 1.0 break lexicographically
  CHECK(ranking[2].name == "zeta");

  AttributionMatrix with_dead = attr;
  with_dead.values.col(1).setZero();
  const FeatureRanking dead_rank = mean_abs_ranking(with_dead);
  CHECK(dead_rank.back().name == "zeta");
  CHECK(dead_rank.back().mean_abs_attribution == 0.0);
}

TEST_CASE("signs never cancel inside the ranking") {
  AttributionMatrix attr;
  attr.feature_names = {"f"};
  attr.values.resize(2, 1);
  attr.values << 3.0, -3.0;
  CHECK(mean_abs_ranking(attr)[0].mean_abs_attribution == doctest::Approx(3.0));
}

TEST_CASE("ranking is stable under row permutation and positive rescaling") {
  Rng rng(10);
  AttributionMatrix attr;
  attr.feature_names = {"a", "b", "c", "d"};
  attr.values.resize(6, 4);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 4; ++j) attr.values(i, j) = rng.normal();
  }
  const FeatureRanking base = mean_abs_ranking(attr);

  AttributionMatrix permuted = attr;
  permuted.values.row(0).swap(permuted.values.row(5));
  permuted.values.row(2).swap(permuted.values.row(3));
  const FeatureRanking shuffled = mean_abs_ranking(permuted);

  AttributionMatrix scaled = attr;
  scaled.values *= 3.7;
  const FeatureRanking rescaled = mean_abs_ranking(scaled);

  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(base[i].name == shuffled[i].name);
    CHECK(base[i].name == rescaled[i].name);
  }
}

TEST_CASE("attribution CSV export carries the base value column") {
  AttributionMatrix attr;
  attr.feature_names = {"x1", "x2"};
  attr.base_value = 0.25;
  attr.values.resize(2, 2);
  attr.values << 1.0, -1.0, 0.5, 0.25;
  const std::string csv_text = attribution_to_csv(attr);
  CHECK(csv_text.find("x1,x2,__base_value__") == 0);
  CHECK(std::count(csv_text.begin(), csv_text.end(), '\n') == 3);
  CHECK(csv_text.find("0.25") != std::string::npos);
}
