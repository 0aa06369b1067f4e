#include <doctest.h>

#include <cmath>
#include <vector>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/rng.hpp"
#include "ckdprog/metrics/metrics.hpp"

using namespace ckdprog;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Eigen::VectorXi ivec(std::initializer_list<int> v) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) out(i++) = x;
  return out;
}

// Tie-aware Mann-Whitney by exhaustive pair enumeration.
double auroc_oracle(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  double credit = 0.0;
  double pairs = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (labels(i) != 1) continue;
    for (Eigen::Index j = 0; j < scores.size(); ++j) {
      if (labels(j) != 0) continue;
      pairs += 1.0;
      if (scores(i) > scores(j)) credit += 1.0;
      else if (scores(i) == scores(j)) credit += 0.5;
    }
  }
  return credit / pairs;
}

}  // namespace

TEST_CASE("auroc fixed points") {
  CHECK(auroc(vec({0.0, 1.0, 0.0, 1.0}), ivec({0, 1, 0, 1})) == 1.0);
  CHECK(auroc(vec({0.4, 0.4, 0.4}), ivec({0, 1, 0})) == 0.5);
  CHECK(auroc(vec({0.1, 0.4, 0.35, 0.8}), ivec({0, 0, 1, 1})) == doctest::Approx(0.75));
  CHECK_THROWS_AS(auroc(vec({0.1, 0.2}), ivec({1, 1})), ValidationError);
}

TEST_CASE("auroc equals pair enumeration on fuzzed ties") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(4, 40));
    Eigen::VectorXd scores(n);
    Eigen::VectorXi labels(n);
    for (int i = 0; i < n; ++i) {
      scores(i) = static_cast<double>(rng.uniform_int(0, 5));  // deliberate ties
      labels(i) = rng.bernoulli(0.45) ? 1 : 0;
    }
    labels(0) = 0;
    labels(1) = 1;
    CHECK(auroc(scores, labels) == doctest::Approx(auroc_oracle(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("auroc mirror symmetry for tie-free scores") {
  Rng rng(32);
  const int n = 30;
  Eigen::VectorXd scores(n);
  Eigen::VectorXi labels(n);
  for (int i = 0; i < n; ++i) {
    scores(i) = rng.normal();
    labels(i) = i % 2;
  }
  CHECK(auroc(scores, labels) == doctest::Approx(1.0 - auroc(-scores, labels)).epsilon(1e-12));
}

TEST_CASE("concordance fixed points") {
  const Eigen::VectorXd durations = vec({2, 4, 6, 8, 10});
  const Eigen::VectorXi all_events = ivec({1, 1, 1, 1, 1});
  CHECK(concordance_index(vec({5, 4, 3, 2, 1}), durations, all_events) == 1.0);
  CHECK(concordance_index(vec({1, 1, 1, 1, 1}), durations, all_events) == 0.5);
}

TEST_CASE("concordance counts comparable pairs under censoring") {
  // Durations (2,4,6,8,10), events (1,1,0,1,1): comparable pairs are the
  // eight with an observed earlier event; the censored subject can only be
  // the later partner. Perfectly anti-ordered risks score 1; swapping the
  // first two risks flips exactly one of the eight pairs.
  const Eigen::VectorXd durations = vec({2, 4, 6, 8, 10});
  const Eigen::VectorXi events = ivec({1, 1, 0, 1, 1});
  CHECK(concordance_index(vec({5, 4, 3, 2, 1}), durations, events) == 1.0);
  CHECK(concordance_index(vec({4, 5, 3, 2, 1}), durations, events) == doctest::Approx(7.0 / 8.0));
}

TEST_CASE("concordance is invariant under monotone transforms") {
  Rng rng(33);
  const int n = 30;
  Eigen::VectorXd risk(n), durations(n);
  Eigen::VectorXi events(n);
  for (int i = 0; i < n; ++i) {
    risk(i) = rng.normal();
    durations(i) = rng.exponential(0.2);
    events(i) = rng.bernoulli(0.3) ? 0 : 1;
  }
  events(0) = 1;
  const double base = concordance_index(risk, durations, events);
  const Eigen::VectorXd warped = (3.0 * risk).array().exp();
  CHECK(concordance_index(warped, durations, events) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("concordance requires a comparable pair") {
  CHECK_THROWS_AS(concordance_index(vec({1, 2}), vec({5, 5}), ivec({0, 0})), ValidationError);
}

TEST_CASE("strict ties mode zeroes tie credit") {
  const Eigen::VectorXd durations = vec({1, 2});
  const Eigen::VectorXi events = ivec({1, 1});
  CHECK(concordance_index(vec({3, 3}), durations, events, TieMode::kHalfCredit) == 0.5);
  CHECK(concordance_index(vec({3, 3}), durations, events, TieMode::kStrict) == 0.0);
}

TEST_CASE("brier score fixed points") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(4, 1);
  SurvivalDataset data;
  data.durations = vec({10, 9, 1, 2});
  data.events = ivec({1, 1, 1, 1});
  data.features.values = X;
  data.features.column_names = {"x"};
  data.features.column_kinds = {ColumnKind::kLabAggregate};

  const SurvivalFn sure = [](Eigen::Index, double) { return 1.0; };
  SurvivalDataset survivors = data;
  survivors.durations = vec({10, 9, 8, 7});
  CHECK(brier_score(sure, survivors, 5.0) == 0.0);

  const SurvivalFn half = [](Eigen::Index, double) { return 0.5; };
  CHECK(brier_score(half, data, 5.0) == 0.25);

  // Predicted survival (0.9, 0.8, 0.3, 0.1) against survivors-past-t (1,1,0,0).
  const std::vector<double> prediction = {0.9, 0.8, 0.3, 0.1};
  const SurvivalFn hand = [&](Eigen::Index row, double) {
    return prediction[static_cast<std::size_t>(row)];
  };
  CHECK(brier_score(hand, data, 5.0) == doctest::Approx(0.0375).epsilon(1e-15));
}

TEST_CASE("ipcw brier equals the literal form without censoring") {
  Rng rng(34);
  const int n = 25;
  SurvivalDataset data;
  data.durations.resize(n);
  data.events = Eigen::VectorXi::Ones(n);
  data.features.values = Eigen::MatrixXd::Zero(n, 1);
  data.features.column_names = {"x"};
  data.features.column_kinds = {ColumnKind::kLabAggregate};
  for (int i = 0; i < n; ++i) data.durations(i) = rng.exponential(0.1);
  const SurvivalFn s = [&](Eigen::Index row, double t) {
    return std::exp(-0.05 * t * (1.0 + 0.01 * static_cast<double>(row)));
  };
  const double t = 8.0;
  CHECK(brier_score(s, data, t, BrierMode::kLiteral) ==
        doctest::Approx(brier_score(s, data, t, BrierMode::kIpcw)).epsilon(1e-12));
}

TEST_CASE("oracle survival function minimizes the brier score") {
  Rng rng(35);
  SurvivalDataset data;
  const int n = 20;
  data.durations.resize(n);
  data.events = Eigen::VectorXi::Ones(n);
  data.features.values = Eigen::MatrixXd::Zero(n, 1);
  data.features.column_names = {"x"};
  data.features.column_kinds = {ColumnKind::kLabAggregate};
  for (int i = 0; i < n; ++i) data.durations(i) = rng.exponential(0.2);
  const double t = 4.0;
  const SurvivalFn oracle = [&](Eigen::Index row, double horizon) {
    return data.durations(row) > horizon ? 1.0 : 0.0;
  };
  CHECK(brier_score(oracle, data, t) == 0.0);
  const SurvivalFn noisy = [&](Eigen::Index row, double horizon) {
    return 0.5 * oracle(row, horizon) + 0.25;
  };
  CHECK(brier_score(noisy, data, t) >= 0.0);
}

TEST_CASE("censoring kaplan meier is flat when no one is censored") {
  const auto g = censoring_kaplan_meier(vec({1, 2, 3, 4}), ivec({1, 1, 1, 1}));
  for (const auto& [t, v] : g) CHECK(v == 1.0);
}

TEST_CASE("dynamic auc coincides with static auroc at a single horizon") {
  Rng rng(36);
  const int n = 40;
  Eigen::VectorXd risk(n), durations(n);
  const Eigen::VectorXi events = Eigen::VectorXi::Ones(n);
  for (int i = 0; i < n; ++i) {
    risk(i) = rng.normal();
    durations(i) = rng.exponential(0.1);
  }
  const double t = 7.0;
  const auto curve = dynamic_auc(risk, durations, events, {t});
  REQUIRE(curve.size() == 1);
  REQUIRE(curve[0].valid);
  Eigen::VectorXi labels(n);
  for (int i = 0; i < n; ++i) labels(i) = durations(i) <= t ? 1 : 0;
  CHECK(curve[0].value == doctest::Approx(auroc(risk, labels)).epsilon(1e-12));
}

TEST_CASE("dynamic auc hand instance with censored exclusions") {
  // Subjects: durations 1..6, the 2nd and 5th censored. At t=2.5 the only
  // case is subject 0 (the censored subject 1 is excluded); at t=4.5 the
  // cases are subjects 0, 2, 3.
  const Eigen::VectorXd risk = vec({3, 9, 8, 1, 6, 5});
  const Eigen::VectorXd durations = vec({1, 2, 3, 4, 5, 6});
  const Eigen::VectorXi events = ivec({1, 0, 1, 1, 0, 1});
  const auto curve = dynamic_auc(risk, durations, events, {2.5, 4.5});
  REQUIRE(curve.size() == 2);
  REQUIRE(curve[0].valid);
  REQUIRE(curve[1].valid);
  // t=2.5: case risk {3} vs control risks {8,1,6,5} -> 1 of 4 pairs.
  CHECK(curve[0].value == doctest::Approx(0.25));
  // t=4.5: case risks {3,8,1} vs control risks {6,5} -> 2 of 6 pairs.
  CHECK(curve[1].value == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("dynamic auc marks degenerate horizons instead of inventing values") {
  const Eigen::VectorXd risk = vec({1, 2, 3});
  const Eigen::VectorXd durations = vec({1, 2, 3});
  const Eigen::VectorXi events = ivec({1, 1, 1});
  const auto curve = dynamic_auc(risk, durations, events, {0.5, 10.0});
  REQUIRE(curve.size() == 2);
  CHECK_FALSE(curve[0].valid);  // no cases yet
  CHECK_FALSE(curve[1].valid);  // no controls left
}

TEST_CASE("tied risks flatten the dynamic auc to one half") {
  const Eigen::VectorXd risk = vec({2, 2, 2, 2});
  const Eigen::VectorXd durations = vec({1, 2, 3, 4});
  const Eigen::VectorXi events = ivec({1, 1, 1, 1});
  const auto curve = dynamic_auc(risk, durations, events, {1.5, 2.5, 3.5});
  for (const auto& point : curve) {
    REQUIRE(point.valid);
    CHECK(point.value == 0.5);
  }
}

TEST_CASE("metric outputs stay inside the unit interval") {
  Rng rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(5, 50));
    Eigen::VectorXd risk(n), durations(n);
    Eigen::VectorXi events(n), labels(n);
    for (int i = 0; i < n; ++i) {
      risk(i) = static_cast<double>(rng.uniform_int(-3, 3));
      durations(i) = static_cast<double>(rng.uniform_int(1, 12));
      events(i) = rng.bernoulli(0.3) ? 0 : 1;
      labels(i) = rng.bernoulli(0.5) ? 1 : 0;
    }
    labels(0) = 0;
    labels(1) = 1;
    events(0) = 1;
    const double a = auroc(risk, labels);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    const double c = concordance_index(risk, durations, events);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    const SurvivalFn s = [&](Eigen::Index, double t) { return std::exp(-0.05 * t); };
    SurvivalDataset data;
    data.durations = durations;
    data.events = events;
    data.features.values = Eigen::MatrixXd::Zero(n, 1);
    data.features.column_names = {"x"};
    data.features.column_kinds = {ColumnKind::kLabAggregate};
    for (const double t : {3.0, 6.0}) {
      const double b = brier_score(s, data, t);
      CHECK(b >= 0.0);
      CHECK(b <= 1.0);
    }
    for (const auto& point : dynamic_auc(risk, durations, events, {4.0, 8.0})) {
      if (point.valid) {
        CHECK(point.value >= 0.0);
        CHECK(point.value <= 1.0);
      }
    }
  }
}
