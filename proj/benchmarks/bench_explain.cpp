#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "ckdprog/common/rng.hpp"
#include "ckdprog/explain/kernel_shap.hpp"
#include "ckdprog/explain/tree_shap.hpp"
#include "ckdprog/models/model.hpp"

namespace {

using namespace ckdprog;

struct Fixture {
  Eigen::MatrixXd X;
  Eigen::VectorXi y;
  Background background;
  Eigen::RowVectorXd row;

  explicit Fixture(int n_features) {
    Rng rng(7);
    X.resize(400, n_features);
    y.resize(400);
    for (int i = 0; i < 400; ++i) {
      for (int j = 0; j < n_features; ++j) X(i, j) = rng.normal();
      y(i) = X(i, 0) + 0.5 * X(i, 1) > rng.normal() ? 1 : 0;
    }
    y(0) = 0;
    y(1) = 1;
    background.rows = X.topRows(100);
    row = X.row(200);
  }
};

void BM_TreeShapBoosted(benchmark::State& state) {
  const Fixture fixture(static_cast<int>(state.range(0)));
  TrainConfig config = default_train_config(Family::kGbt);
  config.boosted.n_estimators = 50;
  config.boosted.max_depth = 4;
  const AnyModel model = train_model(fixture.X, fixture.y, config);
  const BoostedModel& boosted = std::get<BoostedModel>(model);
  for (auto _ : state) {
    const Eigen::VectorXd phi = tree_shap(boosted, fixture.row, fixture.background);
    benchmark::DoNotOptimize(phi);
  }
}
BENCHMARK(BM_TreeShapBoosted)->Arg(10)->Arg(20)->Arg(40);

void BM_KernelShap(benchmark::State& state) {
  const int n_features = static_cast<int>(state.range(0));
  const Fixture fixture(n_features);
  Eigen::VectorXd w(n_features);
  Rng rng(9);
  for (int j = 0; j < n_features; ++j) w(j) = rng.normal();
  const BatchModelFn fn = [&w](const Eigen::MatrixXd& rows) {
    return Eigen::VectorXd((rows * w).array().tanh());
  };
  Background capped;
  capped.rows = fixture.background.rows.topRows(20);
  for (auto _ : state) {
    const Eigen::VectorXd phi = kernel_shap(fn, fixture.row, capped, 256, 3);
    benchmark::DoNotOptimize(phi);
  }
}
BENCHMARK(BM_KernelShap)->Arg(10)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
