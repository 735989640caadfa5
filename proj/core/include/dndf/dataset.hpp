#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dndf/error.hpp"

namespace dndf {

enum class Sex { Male, Female };
enum class TestResult { Negative, Positive };
enum class ConfirmationMethod { Clinical, Rtpcr };
enum class Outcome { Recovered, Deceased };

std::string to_string(Sex v);
std::string to_string(TestResult v);
std::string to_string(ConfirmationMethod v);
std::string to_string(Outcome v);

struct PatientRecord {
  std::string id;
  int age = 0;
  Sex sex = Sex::Male;
  TestResult test_result = TestResult::Negative;
  ConfirmationMethod confirmation_method = ConfirmationMethod::Clinical;
  bool ventilator = false;
  bool cough = false;
  bool apnea = false;
  bool carcinoma = false;
  bool healthcare_staff = false;
  bool icu_hospitalization = false;
  std::optional<int> hospitalization_days;
  std::map<std::string, bool> extra_symptoms;
  Outcome outcome = Outcome::Recovered;

  void validate() const;
};

enum class Provenance { Loaded, Synthetic };

struct Cohort {
  std::vector<PatientRecord> records;
  Provenance provenance = Provenance::Loaded;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return records.size(); }
};

struct RareSymptom {
  std::string name;
  double frequency = 0.0;  // must stay below the 0.1 selection threshold
};

/// Targets for the synthetic cohort generator. Defaults reproduce the
/// headline counts and marginal rates of the study cohort.
struct SyntheticCohortSpec {
  std::size_t n_total = 2875;
  std::size_t n_clinical = 1787;
  std::uint64_t seed = 7;
  double recovery_rate_negative = 0.85;
  double recovery_rate_positive = 0.75;
  int age_death_knee = 40;
  double female_recovery_boost = 0.10;
  std::vector<RareSymptom> rare_symptom_columns = default_rare_symptoms();

  static std::vector<RareSymptom> default_rare_symptoms();
  void validate() const;
};

struct CohortSummary {
  std::size_t total = 0;
  std::size_t recovered = 0;
  std::size_t deceased = 0;
  std::size_t clinical = 0;
  std::size_t rtpcr = 0;
  // Indexed [outcome][other]; outcome 0 = recovered, 1 = deceased.
  std::array<std::array<std::size_t, 2>, 2> by_outcome_test{};    // test 0=negative 1=positive
  std::array<std::array<std::size_t, 2>, 2> by_outcome_method{};  // method 0=clinical 1=rtpcr
  std::array<std::array<std::size_t, 2>, 2> by_outcome_sex{};     // sex 0=male 1=female
  static constexpr std::size_t kAgeBuckets = 13;                  // decades 0-9 ... 120
  std::array<std::array<std::size_t, kAgeBuckets>, 2> age_hist{};
};

/// Reads a comma-separated cohort file (header row, UTF-8). Columns beyond
/// the fixed schema are treated as extra boolean symptom columns.
Cohort load_cohort(const std::string& path);

std::string cohort_to_csv(const Cohort& c);
void save_cohort(const Cohort& c, const std::string& path);

Cohort generate_synthetic(const SyntheticCohortSpec& spec);

CohortSummary cohort_summary(const Cohort& c);

Cohort filter_by_method(const Cohort& c, ConfirmationMethod m);

}  // namespace dndf
