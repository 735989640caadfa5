#include "dndf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dndf/rng.hpp"

namespace dndf {

namespace {

// Column order of the delimited-text schema.
const std::vector<std::string> kFixedColumns = {
    "id",         "age",        "sex",
    "test_result", "confirmation_method", "ventilator",
    "cough",      "apnea",      "carcinoma",
    "healthcare_staff", "icu_hospitalization", "hospitalization_days",
    "outcome"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

int parse_int(const std::string& s, std::size_t row, const std::string& column) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(row) + ": cannot parse '" + s + "' as integer for column " + column);
  }
}

bool parse_bool(const std::string& s, std::size_t row, const std::string& column) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw ParseError("row " + std::to_string(row) + ": cannot parse '" + s + "' as 0/1 for column " + column);
}

template <class Enum>
Enum parse_enum(const std::string& s, std::size_t row, const std::string& column,
                const std::vector<std::pair<std::string, Enum>>& values) {
  for (const auto& [name, v] : values) {
    if (s == name) return v;
  }
  throw ParseError("row " + std::to_string(row) + ": invalid value '" + s + "' for column " + column);
}

std::size_t age_bucket(int age) {
  const std::size_t b = static_cast<std::size_t>(age / 10);
  return std::min(b, CohortSummary::kAgeBuckets - 1);
}

}  // namespace

std::string to_string(Sex v) { return v == Sex::Male ? "male" : "female"; }
std::string to_string(TestResult v) { return v == TestResult::Positive ? "positive" : "negative"; }
std::string to_string(ConfirmationMethod v) {
  return v == ConfirmationMethod::Clinical ? "clinical" : "rtpcr";
}
std::string to_string(Outcome v) { return v == Outcome::Deceased ? "deceased" : "recovered"; }

void PatientRecord::validate() const {
  if (age < 0 || age > 120) {
    throw ValidationError("record '" + id + "': age " + std::to_string(age) + " outside [0, 120]");
  }
  if (hospitalization_days && *hospitalization_days < 0) {
    throw ValidationError("record '" + id + "': negative hospitalization_days");
  }
}

std::vector<RareSymptom> SyntheticCohortSpec::default_rare_symptoms() {
  return {{"hair_loss", 0.05}, {"hiccough", 0.04}, {"skin_rash", 0.03}};
}

void SyntheticCohortSpec::validate() const {
  if (n_clinical > n_total) {
    throw ValidationError("SyntheticCohortSpec: n_clinical exceeds n_total");
  }
  auto check_fraction = [](double v, const char* name) {
    if (v < 0.0 || v > 1.0) {
      throw ValidationError(std::string("SyntheticCohortSpec: ") + name + " outside [0, 1]");
    }
  };
  check_fraction(recovery_rate_negative, "recovery_rate_negative");
  check_fraction(recovery_rate_positive, "recovery_rate_positive");
  check_fraction(female_recovery_boost, "female_recovery_boost");
  if (age_death_knee < 0 || age_death_knee > 120) {
    throw ValidationError("SyntheticCohortSpec: age_death_knee outside [0, 120]");
  }
  std::set<std::string> names;
  for (const auto& rs : rare_symptom_columns) {
    if (rs.frequency < 0.0 || rs.frequency >= 0.1) {
      throw ValidationError("SyntheticCohortSpec: rare symptom '" + rs.name +
                            "' frequency must be in [0, 0.1)");
    }
    if (!names.insert(rs.name).second) {
      throw ValidationError("SyntheticCohortSpec: duplicate rare symptom '" + rs.name + "'");
    }
  }
}

Cohort load_cohort(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_cohort: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("load_cohort: empty file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  std::set<std::string> seen;
  for (const auto& h : header) {
    if (!seen.insert(h).second) throw SchemaError("load_cohort: duplicate column '" + h + "'");
  }
  std::map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;
  for (const auto& required : kFixedColumns) {
    if (!col_index.count(required)) {
      throw SchemaError("load_cohort: missing required column '" + required + "'");
    }
  }
  std::vector<std::string> extra_columns;
  for (const auto& h : header) {
    if (std::find(kFixedColumns.begin(), kFixedColumns.end(), h) == kFixedColumns.end()) {
      extra_columns.push_back(h);
    }
  }

  Cohort cohort;
  cohort.provenance = Provenance::Loaded;
  std::set<std::string> ids;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    }
    auto cell = [&](const std::string& name) -> const std::string& {
      return cells[col_index.at(name)];
    };
    PatientRecord r;
    r.id = cell("id");
    r.age = parse_int(cell("age"), row, "age");
    r.sex = parse_enum<Sex>(cell("sex"), row, "sex", {{"male", Sex::Male}, {"female", Sex::Female}});
    r.test_result = parse_enum<TestResult>(
        cell("test_result"), row, "test_result",
        {{"positive", TestResult::Positive}, {"negative", TestResult::Negative}});
    r.confirmation_method = parse_enum<ConfirmationMethod>(
        cell("confirmation_method"), row, "confirmation_method",
        {{"clinical", ConfirmationMethod::Clinical}, {"rtpcr", ConfirmationMethod::Rtpcr}});
    r.ventilator = parse_bool(cell("ventilator"), row, "ventilator");
    r.cough = parse_bool(cell("cough"), row, "cough");
    r.apnea = parse_bool(cell("apnea"), row, "apnea");
    r.carcinoma = parse_bool(cell("carcinoma"), row, "carcinoma");
    r.healthcare_staff = parse_bool(cell("healthcare_staff"), row, "healthcare_staff");
    r.icu_hospitalization = parse_bool(cell("icu_hospitalization"), row, "icu_hospitalization");
    const std::string& days = cell("hospitalization_days");
    if (!days.empty()) r.hospitalization_days = parse_int(days, row, "hospitalization_days");
    r.outcome = parse_enum<Outcome>(cell("outcome"), row, "outcome",
                                    {{"recovered", Outcome::Recovered}, {"deceased", Outcome::Deceased}});
    for (const auto& name : extra_columns) {
      r.extra_symptoms[name] = parse_bool(cell(name), row, name);
    }
    r.validate();
    if (!ids.insert(r.id).second) {
      throw ValidationError("load_cohort: duplicate id '" + r.id + "' at row " + std::to_string(row));
    }
    cohort.records.push_back(std::move(r));
  }
  return cohort;
}

std::string cohort_to_csv(const Cohort& c) {
  // Extra symptom columns: union across records, alphabetical.
  std::set<std::string> extras;
  for (const auto& r : c.records) {
    for (const auto& [name, v] : r.extra_symptoms) extras.insert(name);
  }
  std::ostringstream os;
  os << "id,age,sex,test_result,confirmation_method,ventilator,cough,apnea,carcinoma,"
        "healthcare_staff,icu_hospitalization,hospitalization_days,outcome";
  for (const auto& e : extras) os << ',' << e;
  os << '\n';
  for (const auto& r : c.records) {
    os << r.id << ',' << r.age << ',' << to_string(r.sex) << ',' << to_string(r.test_result) << ','
       << to_string(r.confirmation_method) << ',' << (r.ventilator ? 1 : 0) << ','
       << (r.cough ? 1 : 0) << ',' << (r.apnea ? 1 : 0) << ',' << (r.carcinoma ? 1 : 0) << ','
       << (r.healthcare_staff ? 1 : 0) << ',' << (r.icu_hospitalization ? 1 : 0) << ',';
    if (r.hospitalization_days) os << *r.hospitalization_days;
    os << ',' << to_string(r.outcome);
    for (const auto& e : extras) {
      auto it = r.extra_symptoms.find(e);
      os << ',' << (it != r.extra_symptoms.end() && it->second ? 1 : 0);
    }
    os << '\n';
  }
  return os.str();
}

void save_cohort(const Cohort& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_cohort: cannot open '" + path + "' for writing");
  out << cohort_to_csv(c);
}

Cohort generate_synthetic(const SyntheticCohortSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  // Share of positive test results; fixed, the published marginals only
  // constrain the per-result recovery rates.
  constexpr double kPositiveRate = 0.7;

  // Symptom rates conditioned on outcome [recovered, deceased]; chosen so
  // every Table-1 symptom clears the 0.1 selection threshold comfortably.
  struct SymptomRate {
    bool PatientRecord::*field;
    double recovered;
    double deceased;
  };
  const std::vector<SymptomRate> symptom_rates = {
      {&PatientRecord::ventilator, 0.12, 0.65},
      {&PatientRecord::cough, 0.40, 0.55},
      {&PatientRecord::apnea, 0.08, 0.45},
      {&PatientRecord::carcinoma, 0.10, 0.30},
      {&PatientRecord::healthcare_staff, 0.14, 0.08},
      {&PatientRecord::icu_hospitalization, 0.18, 0.75},
  };

  std::vector<ConfirmationMethod> methods(spec.n_total, ConfirmationMethod::Rtpcr);
  std::fill_n(methods.begin(), spec.n_clinical, ConfirmationMethod::Clinical);
  rng.shuffle(methods);

  Cohort cohort;
  cohort.provenance = Provenance::Synthetic;
  cohort.seed = spec.seed;
  cohort.records.reserve(spec.n_total);
  for (std::size_t i = 0; i < spec.n_total; ++i) {
    PatientRecord r;
    r.id = "syn-" + std::to_string(i);
    r.confirmation_method = methods[i];
    r.test_result = rng.bernoulli(kPositiveRate) ? TestResult::Positive : TestResult::Negative;
    const double recovery_rate = r.test_result == TestResult::Positive
                                     ? spec.recovery_rate_positive
                                     : spec.recovery_rate_negative;
    r.outcome = rng.bernoulli(recovery_rate) ? Outcome::Recovered : Outcome::Deceased;
    // Sex conditioned on outcome keeps the recovery marginals intact while
    // giving women the higher recovery share.
    const double female_p = r.outcome == Outcome::Recovered
                                ? 0.5 + spec.female_recovery_boost / 2.0
                                : 0.5 - spec.female_recovery_boost / 2.0;
    r.sex = rng.bernoulli(female_p) ? Sex::Female : Sex::Male;
    if (r.outcome == Outcome::Deceased) {
      // Deaths only at or above the knee, skewed old.
      const double u = rng.uniform();
      const int span = std::max(1, 100 - spec.age_death_knee);
      r.age = spec.age_death_knee + static_cast<int>(std::floor(span * std::sqrt(u)));
      r.age = std::min(r.age, 100);
    } else {
      r.age = 1 + static_cast<int>(std::floor(rng.uniform() * 94.0));
    }
    for (const auto& sr : symptom_rates) {
      const double p = r.outcome == Outcome::Deceased ? sr.deceased : sr.recovered;
      r.*(sr.field) = rng.bernoulli(p);
    }
    // Longer stays skew toward death (knee around a week); informational only,
    // never a model feature.
    if (r.outcome == Outcome::Deceased) {
      r.hospitalization_days = 7 + static_cast<int>(std::floor(rng.uniform() * 14.0));
    } else {
      r.hospitalization_days = static_cast<int>(std::floor(rng.uniform() * 8.0));
    }
    for (const auto& rare : spec.rare_symptom_columns) {
      r.extra_symptoms[rare.name] = rng.bernoulli(rare.frequency);
    }
    r.validate();
    cohort.records.push_back(std::move(r));
  }
  return cohort;
}

CohortSummary cohort_summary(const Cohort& c) {
  if (c.records.empty()) throw ValidationError("cohort_summary: empty cohort");
  CohortSummary s;
  s.total = c.records.size();
  for (const auto& r : c.records) {
    const std::size_t o = r.outcome == Outcome::Deceased ? 1 : 0;
    (o ? s.deceased : s.recovered) += 1;
    if (r.confirmation_method == ConfirmationMethod::Clinical) {
      s.clinical += 1;
    } else {
      s.rtpcr += 1;
    }
    s.by_outcome_test[o][r.test_result == TestResult::Positive ? 1 : 0] += 1;
    s.by_outcome_method[o][r.confirmation_method == ConfirmationMethod::Rtpcr ? 1 : 0] += 1;
    s.by_outcome_sex[o][r.sex == Sex::Female ? 1 : 0] += 1;
    s.age_hist[o][age_bucket(r.age)] += 1;
  }
  return s;
}

Cohort filter_by_method(const Cohort& c, ConfirmationMethod m) {
  Cohort out;
  out.provenance = c.provenance;
  out.seed = c.seed;
  for (const auto& r : c.records) {
    if (r.confirmation_method == m) out.records.push_back(r);
  }
  return out;
}

}  // namespace dndf
