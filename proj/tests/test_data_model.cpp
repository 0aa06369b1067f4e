#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/rng.hpp"
#include "ckdprog/common/stats.hpp"
#include "ckdprog/data/cohort.hpp"
#include "ckdprog/data/feature_matrix.hpp"
#include "ckdprog/data/folds.hpp"
#include "ckdprog/data/preprocess.hpp"
#include "ckdprog/data/survival_data.hpp"
#include "ckdprog/data/synthetic.hpp"
#include "test_support.hpp"

using namespace ckdprog;

namespace {

SubjectTimeline make_timeline(const std::vector<std::pair<std::string, std::int64_t>>& events) {
  SubjectTimeline t;
  t.subject_id = "s";
  for (const auto& [code, day] : events) t.events.push_back({"s", code, day});
  return t;
}

// Midranks, so tied values share their average rank.
std::vector<double> midranks(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * (i + j) + 1.0;
    for (int k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = midranks(a);
  const auto rb = midranks(b);
  return pearson_correlation(ra.data(), rb.data(), static_cast<int>(ra.size()));
}

}  // namespace

TEST_CASE("load_cohort_events groups and sorts one subject") {
  const std::string path = test_support::write_scratch(
      "events_one.csv",
      "subject_id,icd9_code,date\n"
      "s1,5854,2020-03-01\n"
      "s1,40301,2020-01-05\n"
      "s1,5853,2020-01-10\n");
  const auto timelines = load_cohort_events(path);
  REQUIRE(timelines.size() == 1);
  const auto& t = timelines[0];
  CHECK(t.subject_id == "s1");
  REQUIRE(t.events.size() == 3);
  CHECK(std::is_sorted(t.events.begin(), t.events.end(),
                       [](const auto& a, const auto& b) { return a.date < b.date; }));
  std::vector<std::string> staged;
  for (const auto& e : t.events) {
    if (ckd_stage_rank(e.code)) staged.push_back(e.code);
  }
  CHECK(staged == std::vector<std::string>{"5853", "5854"});
}

TEST_CASE("load_cohort_events retains duplicate rows in stable order") {
  const std::string path = test_support::write_scratch(
      "events_dup.csv",
      "subject_id,icd9_code,date\n"
      "s1,5853,2020-01-10\n"
      "s1,5853,2020-01-10\n");
  const auto timelines = load_cohort_events(path);
  REQUIRE(timelines.size() == 1);
  CHECK(timelines[0].events.size() == 2);
  CHECK(timelines[0].events[0].code == timelines[0].events[1].code);
  CHECK(timelines[0].events[0].date == timelines[0].events[1].date);
}

TEST_CASE("load_cohort_events reports the offending line") {
  const std::string path = test_support::write_scratch(
      "events_bad.csv",
      "subject_id,icd9_code,date\n"
      "s1,5853,not-a-date\n");
  try {
    load_cohort_events(path);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("load_cohort_events rejects empty and misheaded files") {
  CHECK_THROWS_AS(load_cohort_events(test_support::write_scratch("events_empty.csv", "")),
                  ValidationError);
  CHECK_THROWS_AS(load_cohort_events(test_support::write_scratch(
                      "events_mishead.csv", "subject,code,when\ns1,5853,2020-01-01\n")),
                  ValidationError);
}

TEST_CASE("label_progression detects a later higher stage") {
  const auto label = label_progression(make_timeline({{"5853", 0}, {"5854", 200}}));
  CHECK(label.progressed);
  CHECK(label.duration_days == 200);
  CHECK(label.index_date == 0);
}

TEST_CASE("label_progression treats improvement as censoring") {
  const auto label = label_progression(make_timeline({{"5854", 0}, {"5853", 90}}));
  CHECK_FALSE(label.progressed);
  CHECK(label.duration_days == 90);
}

TEST_CASE("label_progression ignores unranked 5859 events") {
  const auto label = label_progression(make_timeline({{"5853", 0}, {"5859", 50}, {"5855", 400}}));
  CHECK(label.progressed);
  CHECK(label.duration_days == 400);
}

TEST_CASE("label_progression same-day higher stage does not fire") {
  const auto label = label_progression(make_timeline({{"5853", 10}, {"5854", 10}}));
  CHECK_FALSE(label.progressed);
  CHECK(label.duration_days == 0);
}

TEST_CASE("label_progression requires a staged code") {
  CHECK_THROWS_AS(label_progression(make_timeline({{"40301", 0}, {"5859", 5}})),
                  NotStageableError);
}

TEST_CASE("label_progression is invariant under comorbidity insertions") {
  const auto base = label_progression(make_timeline({{"5852", 0}, {"5854", 120}}));
  const auto padded = label_progression(make_timeline(
      {{"40301", 0}, {"5852", 0}, {"25000", 60}, {"5854", 120}, {"42731", 300}}));
  CHECK(base.progressed == padded.progressed);
  CHECK(base.duration_days == padded.duration_days);
  CHECK(base.index_date == padded.index_date);
}

TEST_CASE("label_progression duration never exceeds the observed span") {
  const std::vector<std::string> codes = {"5851", "5852", "5853", "5854",
                                          "5855", "5856", "5859", "40301"};
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    SubjectTimeline t;
    t.subject_id = "s";
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    std::int64_t day = 0;
    for (int i = 0; i < n; ++i) {
      day += rng.uniform_int(0, 90);
      t.events.push_back({"s", codes[static_cast<std::size_t>(rng.uniform_int(0, 7))], day});
    }
    try {
      const auto label = label_progression(t);
      CHECK(label.duration_days <= t.events.back().date - label.index_date);
      CHECK(label.duration_days >= 0);
    } catch (const NotStageableError&) {
    }
  }
}

TEST_CASE("iso date parsing round trips") {
  CHECK(parse_iso_date("1970-01-01") == 0);
  CHECK(parse_iso_date("2020-07-19") - parse_iso_date("2020-01-01") == 200);
  CHECK(format_iso_date(parse_iso_date("1999-12-31")) == "1999-12-31");
  CHECK_THROWS_AS(parse_iso_date("2020-13-01"), ValidationError);
  CHECK_THROWS_AS(parse_iso_date("2020-02-30"), ValidationError);
}

TEST_CASE("impute_and_standardize median-imputes then centers lab columns") {
  FeatureMatrix m;
  m.column_names = {"lab"};
  m.column_kinds = {ColumnKind::kLabAggregate};
  m.values.resize(3, 1);
  m.values << 1.0, std::numeric_limits<double>::quiet_NaN(), 3.0;
  const auto [out, transform] = impute_and_standardize(m);
  CHECK(transform.medians[0] == doctest::Approx(2.0));
  CHECK(out.values.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(out.values.allFinite());
}

TEST_CASE("impute_and_standardize leaves indicator columns untouched") {
  FeatureMatrix m;
  m.column_names = {"flag"};
  m.column_kinds = {ColumnKind::kComorbidityIndicator};
  m.values.resize(3, 1);
  m.values << 0.0, 1.0, 1.0;
  const auto [out, transform] = impute_and_standardize(m);
  CHECK(out.values(0, 0) == 0.0);
  CHECK(out.values(1, 0) == 1.0);
  CHECK(out.values(2, 0) == 1.0);
  CHECK_FALSE(transform.scaled[0]);
}

TEST_CASE("fitted transform standardizes a held-out median row to zero") {
  FeatureMatrix train;
  train.column_names = {"lab"};
  train.column_kinds = {ColumnKind::kLabAggregate};
  train.values.resize(3, 1);
  train.values << 1.0, std::numeric_limits<double>::quiet_NaN(), 3.0;
  const auto [_, transform] = impute_and_standardize(train);

  FeatureMatrix test = train;
  test.values.resize(1, 1);
  test.values << 2.0;  // the train median
  const FeatureMatrix out = transform.apply(test);
  CHECK(out.values(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fitted transform imputes held-out missing cells from train statistics") {
  FeatureMatrix train;
  train.column_names = {"lab"};
  train.column_kinds = {ColumnKind::kLabAggregate};
  train.values.resize(4, 1);
  train.values << 1.0, 5.0, 3.0, std::numeric_limits<double>::quiet_NaN();
  const auto [_, transform] = impute_and_standardize(train);

  FeatureMatrix test = train;
  test.values.resize(2, 1);
  test.values << std::numeric_limits<double>::quiet_NaN(), 3.0;
  const FeatureMatrix out = transform.apply(test);
  CHECK(out.values(0, 0) == out.values(1, 0));  // missing imputed to the train median 3
}

TEST_CASE("impute_and_standardize names an all-missing column") {
  FeatureMatrix m;
  m.column_names = {"ok", "void"};
  m.column_kinds = {ColumnKind::kLabAggregate, ColumnKind::kLabAggregate};
  m.values.resize(2, 2);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.values << 1.0, nan, 2.0, nan;
  try {
    impute_and_standardize(m);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("void") != std::string::npos);
  }
}

TEST_CASE("feature CSV round trips with missing cells and indicator detection") {
  const std::string path = test_support::write_scratch(
      "features_small.csv",
      "subject_id,albumin,diabetes\n"
      "a,3.5,1\n"
      "b,,0\n"
      "c,4.1,1\n");
  const FeatureMatrix m = load_feature_matrix(path);
  CHECK(m.rows() == 3);
  CHECK(m.column_names == std::vector<std::string>{"albumin", "diabetes"});
  CHECK(m.row_ids == std::vector<std::string>{"a", "b", "c"});
  CHECK(std::isnan(m.values(1, 0)));
  CHECK(m.column_kinds[1] == ColumnKind::kComorbidityIndicator);
  CHECK(m.column_kinds[0] == ColumnKind::kLabAggregate);
}

TEST_CASE("survival CSV shifts zero durations and aligns by subject") {
  const std::string path = test_support::write_scratch(
      "survival_small.csv",
      "subject_id,duration_days,event\n"
      "b,0,1\n"
      "a,200,0\n");
  const SurvivalDataset raw = load_survival_csv(path);
  CHECK(raw.durations.minCoeff() == kZeroDurationShiftDays);

  FeatureMatrix features;
  features.column_names = {"x"};
  features.column_kinds = {ColumnKind::kLabAggregate};
  features.values.resize(2, 1);
  features.values << 1.0, 2.0;
  features.row_ids = {"a", "b"};
  const SurvivalDataset aligned = align_by_subject(raw, raw.features.row_ids, features);
  CHECK(aligned.durations(0) == 200.0);  // row order follows the feature matrix
  CHECK(aligned.durations(1) == kZeroDurationShiftDays);
  CHECK(aligned.events(0) == 0);
  CHECK(aligned.events(1) == 1);

  FeatureMatrix mismatched = features;
  mismatched.row_ids = {"a", "zz"};
  CHECK_THROWS_AS(align_by_subject(raw, raw.features.row_ids, mismatched), ValidationError);
}

TEST_CASE("synthetic cohort with null coefficients decorrelates features from durations") {
  SyntheticConfig config;
  config.n_subjects = 2000;
  config.n_signal_features = 1;
  config.true_beta = Eigen::VectorXd::Zero(1);
  config.n_noise_features = 2;
  config.seed = 11;
  const SyntheticCohort cohort = generate_synthetic_cohort(config);
  std::vector<double> duration(cohort.survival.durations.data(),
                               cohort.survival.durations.data() + cohort.survival.size());
  for (int j = 0; j < cohort.features.cols(); ++j) {
    std::vector<double> col(cohort.features.values.col(j).data(),
                            cohort.features.values.col(j).data() + cohort.features.rows());
    CHECK(std::abs(spearman(col, duration)) <= 0.1);
  }
}

TEST_CASE("synthetic censoring calibration hits its target") {
  SyntheticConfig config;
  config.n_subjects = 5000;
  config.n_signal_features = 2;
  config.true_beta = (Eigen::VectorXd(2) << 0.8, -0.4).finished();
  config.n_noise_features = 2;
  config.censor_rate_target = 0.3;
  config.seed = 5;
  const SyntheticCohort cohort = generate_synthetic_cohort(config);
  CHECK(cohort.truth.censor_fraction >= 0.27);
  CHECK(cohort.truth.censor_fraction <= 0.33);
  const double realized =
      1.0 - static_cast<double>(cohort.survival.event_count()) / config.n_subjects;
  CHECK(realized == doctest::Approx(cohort.truth.censor_fraction));
}

TEST_CASE("synthetic cohort is deterministic in its seed") {
  SyntheticConfig config;
  config.n_subjects = 300;
  config.n_signal_features = 2;
  config.true_beta = (Eigen::VectorXd(2) << 1.0, -0.5).finished();
  config.n_noise_features = 3;
  config.with_kfre_columns = true;
  config.seed = 99;
  const SyntheticCohort a = generate_synthetic_cohort(config);
  const SyntheticCohort b = generate_synthetic_cohort(config);
  CHECK((a.features.values.array() == b.features.values.array()).all());
  CHECK((a.survival.durations.array() == b.survival.durations.array()).all());
  CHECK((a.survival.events.array() == b.survival.events.array()).all());
  CHECK(a.truth.censor_rate == b.truth.censor_rate);
  CHECK(a.progressed == b.progressed);
}

TEST_CASE("synthetic hazard direction shortens observed times in the top quartile") {
  SyntheticConfig config;
  config.n_subjects = 2000;
  config.n_signal_features = 1;
  config.true_beta = (Eigen::VectorXd(1) << 1.0).finished();
  config.seed = 3;
  const SyntheticCohort cohort = generate_synthetic_cohort(config);
  std::vector<int> order(static_cast<std::size_t>(config.n_subjects));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return cohort.features.values(a, 0) < cohort.features.values(b, 0);
  });
  const int q = config.n_subjects / 4;
  double bottom = 0.0, top = 0.0;
  for (int i = 0; i < q; ++i) {
    bottom += cohort.survival.durations(order[static_cast<std::size_t>(i)]);
    top += cohort.survival.durations(order[order.size() - 1 - static_cast<std::size_t>(i)]);
  }
  CHECK(top < bottom);
}

TEST_CASE("synthetic kfre columns are appended with their canonical names") {
  SyntheticConfig config;
  config.n_subjects = 50;
  config.n_signal_features = 1;
  config.true_beta = (Eigen::VectorXd(1) << 0.5).finished();
  config.with_kfre_columns = true;
  const SyntheticCohort cohort = generate_synthetic_cohort(config);
  for (const std::string& name : synthetic_kfre_column_names()) {
    CHECK(cohort.features.column_index(name) >= 0);
  }
}

TEST_CASE("synthetic config validation") {
  SyntheticConfig config;
  config.n_subjects = 10;
  config.n_signal_features = 2;
  config.true_beta = Eigen::VectorXd::Zero(1);  // length mismatch
  CHECK_THROWS_AS(generate_synthetic_cohort(config), ValidationError);
  config.true_beta = Eigen::VectorXd::Zero(2);
  config.censor_rate_target = 1.0;  // must be strictly inside (0,1)
  CHECK_THROWS_AS(generate_synthetic_cohort(config), ValidationError);
}

TEST_CASE("split_folds partitions evenly") {
  const auto folds = split_folds(10, 5, 1);
  REQUIRE(folds.size() == 5);
  std::set<int> seen;
  for (const auto& fold : folds) {
    CHECK(fold.size() == 2);
    seen.insert(fold.begin(), fold.end());
  }
  CHECK(seen.size() == 10);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 9);
}

TEST_CASE("split_folds spreads the remainder") {
  const auto folds = split_folds(11, 5, 2);
  std::multiset<std::size_t> sizes;
  for (const auto& fold : folds) sizes.insert(fold.size());
  CHECK(sizes == std::multiset<std::size_t>{2, 2, 2, 2, 3});
}

TEST_CASE("split_folds is deterministic and validates its inputs") {
  CHECK(split_folds(37, 4, 123) == split_folds(37, 4, 123));
  CHECK(split_folds(37, 4, 123) != split_folds(37, 4, 124));
  CHECK_THROWS_AS(split_folds(3, 5, 0), ValidationError);
  CHECK_THROWS_AS(split_folds(10, 1, 0), ValidationError);
}

TEST_CASE("train_indices complements each fold") {
  const int n = 23;
  const auto folds = split_folds(n, 4, 9);
  for (int f = 0; f < 4; ++f) {
    const auto train = train_indices(folds, n, f);
    CHECK(train.size() + folds[static_cast<std::size_t>(f)].size() == static_cast<std::size_t>(n));
    CHECK(std::is_sorted(train.begin(), train.end()));
    std::set<int> test_set(folds[static_cast<std::size_t>(f)].begin(),
                           folds[static_cast<std::size_t>(f)].end());
    for (int idx : train) CHECK(test_set.count(idx) == 0);
  }
}

TEST_CASE("fold partition holds across fuzzed shapes") {
  Rng rng(500);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(4, 200));
    const int k = static_cast<int>(rng.uniform_int(2, std::min(n, 8)));
    const auto folds = split_folds(n, k, rng.next_u64());
    std::vector<int> seen;
    std::size_t max_size = 0, min_size = static_cast<std::size_t>(n);
    for (const auto& fold : folds) {
      seen.insert(seen.end(), fold.begin(), fold.end());
      max_size = std::max(max_size, fold.size());
      min_size = std::min(min_size, fold.size());
    }
    std::sort(seen.begin(), seen.end());
    CHECK(static_cast<int>(seen.size()) == n);
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    CHECK(max_size - min_size <= 1);
  }
}
