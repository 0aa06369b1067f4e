#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "ckdprog/common/rng.hpp"
#include "ckdprog/models/model.hpp"

namespace {

using namespace ckdprog;

std::pair<Eigen::MatrixXd, Eigen::VectorXi> make_training(int rows, int n_features) {
  Rng rng(11);
  Eigen::MatrixXd X(rows, n_features);
  Eigen::VectorXi y(rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < n_features; ++j) X(i, j) = rng.normal();
    y(i) = X(i, 0) - X(i, 1) + 0.5 * rng.normal() > 0 ? 1 : 0;
  }
  y(0) = 0;
  y(1) = 1;
  return {X, y};
}

void BM_TrainLogistic(benchmark::State& state) {
  const auto [X, y] = make_training(static_cast<int>(state.range(0)), 20);
  const TrainConfig config = default_train_config(Family::kLr);
  for (auto _ : state) {
    const AnyModel model = train_model(X, y, config);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_TrainLogistic)->Arg(500)->Arg(2000);

void BM_TrainBoostedRound(benchmark::State& state) {
  const auto [X, y] = make_training(static_cast<int>(state.range(0)), 20);
  TrainConfig config = default_train_config(Family::kGbt);
  config.boosted.n_estimators = 10;
  config.boosted.max_depth = 6;
  for (auto _ : state) {
    const AnyModel model = train_model(X, y, config);
    benchmark::DoNotOptimize(model);
  }
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_TrainBoostedRound)->Arg(500)->Arg(2000);

void BM_TrainForest(benchmark::State& state) {
  const auto [X, y] = make_training(static_cast<int>(state.range(0)), 20);
  TrainConfig config = default_train_config(Family::kRf);
  config.forest.n_estimators = 20;
  config.forest.max_depth = 8;
  for (auto _ : state) {
    const AnyModel model = train_model(X, y, config);
    benchmark::DoNotOptimize(model);
  }
  state.SetItemsProcessed(state.iterations() * 20);
}
BENCHMARK(BM_TrainForest)->Arg(500)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
