#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bargainlab {

enum class TeenGender { daughter, son };

std::string to_string(TeenGender g);
TeenGender gender_from_string(const std::string& s);

// One observed household: a father ("parent") and the oldest teen, plus
// the transfer/instrument columns. Wages are hourly in thousands of
// colones, incomes in thousands of colones, hours per week. teen_wage is
// structurally missing while the teen studies; never encode it as zero.
struct HouseholdRecord {
    std::string id;
    int year = 0;
    TeenGender teen_gender = TeenGender::son;
    double teen_age = 0.0;
    int schooling = 0;             // s^t: 1 = studies, 0 = works
    double teen_market_hours = 0.0;
    std::optional<double> teen_wage;
    bool teen_wage_imputed = false;
    double teen_domestic_hours = 0.0;
    double parent_wage = 0.0;
    double parent_market_hours = 0.0;
    double parent_domestic_hours = 0.0;
    double nonlabor_income = 0.0;
    int treated = 0;               // D: receives the transfer
    double transfer_amount = 0.0;  // y_A, 0 when untreated
    double instrument = 0.0;       // Z: neighbourhood treatment share
    Eigen::VectorXd covariates;    // aligned with Dataset::covariate_names
    std::optional<double> cf_residual;
};

// Immutable, validated collection of records. Every mutation-like
// operation returns a fresh Dataset; instances are safe to share across
// threads.
class Dataset {
public:
    Dataset(std::vector<HouseholdRecord> records, std::vector<std::string> covariate_names,
            std::string schema_version = "bargain-lab/1");

    const std::vector<HouseholdRecord>& records() const { return records_; }
    const std::vector<std::string>& covariate_names() const { return covariate_names_; }
    const std::string& schema_version() const { return schema_version_; }
    std::size_t size() const { return records_.size(); }

    bool has_covariate(const std::string& name) const;
    Eigen::Index covariate_index(const std::string& name) const; // throws if absent

    // Column accessor over core fields and covariates alike. teen_wage
    // and cf_residual yield NaN where missing.
    Eigen::VectorXd column(const std::string& name) const;

    Dataset subset(const std::vector<Eigen::Index>& rows) const;
    // Bootstrap resample: duplicate occurrences get an id suffix so the
    // unique-id invariant survives resampling with replacement.
    Dataset resampled(const std::vector<Eigen::Index>& rows) const;
    Dataset with_cf_residuals(const Eigen::VectorXd& resid) const;
    Dataset with_records(std::vector<HouseholdRecord> records) const;

private:
    void validate() const;

    std::vector<HouseholdRecord> records_;
    std::vector<std::string> covariate_names_;
    std::string schema_version_;
};

// Optional header renames: CSV column name -> canonical field name.
using CsvSchema = std::map<std::string, std::string>;

Dataset load_dataset(const std::string& path, const CsvSchema& schema = {});
void write_dataset(const std::string& path, const Dataset& d);

struct Interval {
    std::optional<double> lo;
    std::optional<double> hi;
    bool active() const { return lo.has_value() || hi.has_value(); }
    bool contains(double v) const;
};

// The age windows reproduce the published sample frame; the trim bounds
// have no published values and stay inactive unless the caller sets them.
struct SelectionRules {
    Interval teen_age{15.0, 20.0};
    Interval parent_age{30.0, 64.0};
    std::string parent_age_covariate = "father_age"; // empty disables the age window
    bool require_father_works = true;                // parent_market_hours > 0
    Interval parent_wage{};
    Interval teen_wage{};  // applied to observed wages only
    Interval income{};
    Interval market_hours{}; // teen and parent market hours alike
};

struct RuleCount {
    std::string rule;
    std::size_t dropped = 0;
};

struct SelectionReport {
    std::size_t examined = 0;
    std::size_t kept = 0;
    std::vector<RuleCount> counts; // one entry per configured rule, in order
};

struct SelectionResult {
    Dataset data;
    SelectionReport report;
};

// Applies the rules in a fixed order; each dropped record is charged to
// the first rule it fails. An empty result is an error, not a success.
SelectionResult select_sample(const Dataset& d, const SelectionRules& rules);

// Design-matrix helper: resolves column names (core fields or
// covariates), optionally prepends an intercept, and rejects rows with
// missing values, naming record and column.
Eigen::MatrixXd design_matrix(const Dataset& d, const std::vector<std::string>& columns,
                              const std::vector<Eigen::Index>& rows, bool add_intercept,
                              std::vector<std::string>* names_out = nullptr);

std::vector<Eigen::Index> all_rows(const Dataset& d);

} // namespace bargainlab
