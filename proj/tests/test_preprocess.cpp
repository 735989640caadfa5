#include <algorithm>
#include <set>

#include <doctest.h>

#include "dndf/preprocess.hpp"

using namespace dndf;

namespace {

// Ten-record cohort with controlled frequencies: cough on 5/10 (kept),
// ventilator on 1/10 (kept: exactly at the 0.1 threshold), apnea on 0/10
// (dropped), extra "hiccough" on 1/10 (kept), extra "rash" on 0/10 (dropped).
Cohort tiny_cohort() {
  Cohort c;
  for (int i = 0; i < 10; ++i) {
    PatientRecord r;
    r.id = "t" + std::to_string(i);
    r.age = 20 + 5 * i;  // 20 .. 65
    r.sex = i % 2 ? Sex::Female : Sex::Male;
    r.test_result = i < 7 ? TestResult::Positive : TestResult::Negative;
    r.confirmation_method = i < 6 ? ConfirmationMethod::Clinical : ConfirmationMethod::Rtpcr;
    r.cough = i % 2 == 0;
    r.ventilator = i == 3;
    r.extra_symptoms["hiccough"] = i == 9;
    r.extra_symptoms["rash"] = false;
    r.outcome = i < 7 ? Outcome::Recovered : Outcome::Deceased;
    c.records.push_back(r);
  }
  return c;
}

}  // namespace

TEST_CASE("normalize_age maps min/max to 0/1 and handles a degenerate range") {
  const std::vector<double> out = normalize_age({20, 45, 70});
  CHECK(out[0] == 0.0);
  CHECK(out[1] == doctest::Approx(0.5));
  CHECK(out[2] == 1.0);
  CHECK(normalize_age({33, 33, 33}) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK_THROWS_AS(normalize_age({}), ValidationError);
}

TEST_CASE("select_by_frequency keeps the fixed trio plus frequent symptoms") {
  const FeatureSchema schema = select_by_frequency(tiny_cohort(), 0.1);
  std::vector<std::string> names;
  for (const auto& col : schema.columns) names.push_back(col.name);
  // Threshold is inclusive: ventilator and hiccough sit exactly at 0.1.
  CHECK(names == std::vector<std::string>{"test_result", "confirmation_method", "age",
                                          "ventilator", "cough", "hiccough"});
  CHECK(schema.columns[2].kind == ColumnKind::Continuous);

  const FeatureSchema strict = select_by_frequency(tiny_cohort(), 0.2);
  names.clear();
  for (const auto& col : strict.columns) names.push_back(col.name);
  CHECK(names == std::vector<std::string>{"test_result", "confirmation_method", "age", "cough"});
}

TEST_CASE("encode_features produces the documented encoding") {
  const Cohort c = tiny_cohort();
  const FeatureSchema schema = select_by_frequency(c, 0.1);
  const DesignMatrix dm = encode_features(c, schema);
  REQUIRE(dm.n_rows() == 10);
  REQUIRE(dm.n_cols() == 6);
  // Row 0: positive test (1), clinical method (1), age 20 -> 0, no
  // ventilator, cough, no hiccough.
  CHECK(dm.X.at(0, 0) == 1.0);
  CHECK(dm.X.at(0, 1) == 1.0);
  CHECK(dm.X.at(0, 2) == 0.0);
  CHECK(dm.X.at(0, 3) == 0.0);
  CHECK(dm.X.at(0, 4) == 1.0);
  CHECK(dm.X.at(0, 5) == 0.0);
  // Row 9: negative test, rtpcr, age 65 -> 1, hiccough set, deceased.
  CHECK(dm.X.at(9, 0) == 0.0);
  CHECK(dm.X.at(9, 1) == 0.0);
  CHECK(dm.X.at(9, 2) == 1.0);
  CHECK(dm.X.at(9, 5) == 1.0);
  CHECK(dm.y == std::vector<int>{0, 0, 0, 0, 0, 0, 0, 1, 1, 1});
  REQUIRE(dm.schema.age_min_max.has_value());
  CHECK(dm.schema.age_min_max->first == 20.0);
  CHECK(dm.schema.age_min_max->second == 65.0);
}

TEST_CASE("stage views") {
  const Cohort c = tiny_cohort();
  const DesignMatrix dm = encode_features(c, select_by_frequency(c, 0.1));

  const DesignMatrix s1 = stage_view(dm, Stage::S1);
  CHECK(s1.n_cols() == 6);
  CHECK(s1.n_rows() == 10);

  const DesignMatrix s2 = stage_view(dm, Stage::S2);
  CHECK(s2.n_cols() == 4);
  CHECK_FALSE(s2.schema.column_index("test_result").has_value());
  CHECK_FALSE(s2.schema.column_index("confirmation_method").has_value());
  CHECK(s2.n_rows() == 10);
  CHECK(s2.X.at(0, 0) == dm.X.at(0, 2));  // age moved up

  const DesignMatrix s3 = stage_view(dm, Stage::S3);
  CHECK(s3.n_rows() == 6);  // clinical rows
  CHECK(s3.n_cols() == 6);
  for (std::size_t i = 0; i < s3.n_rows(); ++i) CHECK(s3.X.at(i, 1) == 1.0);

  const DesignMatrix s4 = stage_view(dm, Stage::S4);
  CHECK(s4.n_rows() == 4);  // rtpcr rows
  for (std::size_t i = 0; i < s4.n_rows(); ++i) CHECK(s4.X.at(i, 1) == 0.0);

  // S2 first (no method column) cannot be row-filtered afterwards.
  CHECK_THROWS_AS(stage_view(s2, Stage::S3), ValidationError);
}

TEST_CASE("stratified_split sizes, class balance and determinism") {
  const Cohort c = tiny_cohort();
  const DesignMatrix dm = encode_features(c, select_by_frequency(c, 0.1));
  const SplitResult split = stratified_split(dm, 0.2, 99);
  CHECK(split.test.n_rows() == 2);  // ceil(10 * 0.2)
  CHECK(split.train.n_rows() == 8);

  // Largest remainder: class 0 ideal 1.4 -> 1, class 1 ideal 0.6 -> gets the
  // leftover seat -> 1 of each class in test.
  CHECK(std::count(split.test.y.begin(), split.test.y.end(), 1) == 1);
  CHECK(std::count(split.test.y.begin(), split.test.y.end(), 0) == 1);

  // No row appears in both partitions, none is lost.
  std::set<std::string> ids(split.train.row_ids.begin(), split.train.row_ids.end());
  for (const auto& id : split.test.row_ids) CHECK(ids.insert(id).second);
  CHECK(ids.size() == 10);

  const SplitResult again = stratified_split(dm, 0.2, 99);
  CHECK(again.test.row_ids == split.test.row_ids);
  CHECK(again.train.row_ids == split.train.row_ids);
  const SplitResult other = stratified_split(dm, 0.2, 100);
  CHECK(other.test.row_ids != split.test.row_ids);

  CHECK_THROWS_AS(stratified_split(dm, 0.0, 1), ValidationError);
  CHECK_THROWS_AS(stratified_split(dm, 1.0, 1), ValidationError);
}

TEST_CASE("stratified_split rejects a class with fewer than 2 rows") {
  Cohort c = tiny_cohort();
  for (auto& r : c.records) r.outcome = Outcome::Recovered;
  c.records[0].outcome = Outcome::Deceased;
  const DesignMatrix dm = encode_features(c, select_by_frequency(c, 0.1));
  CHECK_THROWS_AS(stratified_split(dm, 0.2, 1), ValidationError);
}

TEST_CASE("apply_train_normalization rescales with train-only statistics") {
  const Cohort c = tiny_cohort();
  const DesignMatrix dm = encode_features(c, select_by_frequency(c, 0.1));
  SplitResult split = stratified_split(dm, 0.2, 7);
  apply_train_normalization(split);

  const std::size_t age = *split.train.schema.column_index("age");
  double mn = 1e9, mx = -1e9;
  for (std::size_t i = 0; i < split.train.n_rows(); ++i) {
    mn = std::min(mn, split.train.X.at(i, age));
    mx = std::max(mx, split.train.X.at(i, age));
  }
  CHECK(mn == 0.0);
  CHECK(mx == 1.0);
  for (std::size_t i = 0; i < split.test.n_rows(); ++i) {
    CHECK(split.test.X.at(i, age) >= 0.0);
    CHECK(split.test.X.at(i, age) <= 1.0);
  }
}
