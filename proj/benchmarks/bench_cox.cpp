#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "ckdprog/data/synthetic.hpp"
#include "ckdprog/survival/cox.hpp"

namespace {

using namespace ckdprog;

SyntheticCohort make_cohort(int n) {
  SyntheticConfig config;
  config.n_subjects = n;
  config.n_signal_features = 4;
  config.true_beta = (Eigen::VectorXd(4) << 1.0, -0.5, 0.8, -0.3).finished();
  config.n_noise_features = 6;
  config.seed = 42;
  return generate_synthetic_cohort(config);
}

void BM_CoxObjective(benchmark::State& state) {
  const SyntheticCohort cohort = make_cohort(static_cast<int>(state.range(0)));
  const Eigen::VectorXd beta = Eigen::VectorXd::Constant(cohort.features.cols(), 0.1);
  for (auto _ : state) {
    const CoxObjectiveEval eval =
        neg_log_partial_likelihood(beta, cohort.survival, 0.0007, TieRule::kEfron);
    benchmark::DoNotOptimize(eval.value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CoxObjective)->Arg(200)->Arg(1000)->Arg(5000);

void BM_CoxFit(benchmark::State& state) {
  const SyntheticCohort cohort = make_cohort(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const FittedCox fitted = fit_cox(cohort.survival);
    benchmark::DoNotOptimize(fitted.beta);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CoxFit)->Arg(200)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
