#include "bargainlab/dataset.hpp"

#include <cmath>
#include <functional>
#include <set>
#include <unordered_map>

#include "bargainlab/csv.hpp"
#include "bargainlab/errors.hpp"

namespace bargainlab {

namespace {

const std::vector<std::string> kCoreColumns = {
    "id", "year", "teen_gender", "teen_age", "schooling", "teen_market_hours",
    "teen_wage", "teen_wage_imputed", "teen_domestic_hours", "parent_wage",
    "parent_market_hours", "parent_domestic_hours", "nonlabor_income",
    "treated", "transfer_amount", "instrument", "cf_residual"};

bool is_core_column(const std::string& name) {
    for (const auto& c : kCoreColumns) {
        if (c == name) return true;
    }
    return false;
}

} // namespace

std::string to_string(TeenGender g) {
    return g == TeenGender::daughter ? "daughter" : "son";
}

TeenGender gender_from_string(const std::string& s) {
    if (s == "daughter") return TeenGender::daughter;
    if (s == "son") return TeenGender::son;
    throw ValidationError("teen_gender must be 'daughter' or 'son', got '" + s + "'");
}

bool Interval::contains(double v) const {
    if (lo && v < *lo) return false;
    if (hi && v > *hi) return false;
    return true;
}

Dataset::Dataset(std::vector<HouseholdRecord> records, std::vector<std::string> covariate_names,
                 std::string schema_version)
    : records_(std::move(records)),
      covariate_names_(std::move(covariate_names)),
      schema_version_(std::move(schema_version)) {
    validate();
}

void Dataset::validate() const {
    std::set<std::string> seen;
    for (const auto& r : records_) {
        auto fail = [&](const std::string& rule) {
            throw ValidationError("record '" + r.id + "': " + rule);
        };
        if (r.id.empty()) throw ValidationError("record with empty id");
        if (!seen.insert(r.id).second) fail("duplicate id");
        if (!(r.parent_wage > 0.0)) fail("parent_wage must be > 0");
        if (r.schooling != 0 && r.schooling != 1) fail("schooling must be 0 or 1");
        if (r.treated != 0 && r.treated != 1) fail("treated must be 0 or 1");
        if (r.treated == 1 && r.schooling != 1) fail("conditionality violated: treated=1 requires schooling=1");
        if (r.teen_market_hours > 0.0 && r.schooling != 0) fail("teen_market_hours > 0 requires schooling=0");
        if (r.treated == 0 && r.transfer_amount != 0.0) fail("transfer_amount must be 0 when untreated");
        if (r.transfer_amount < 0.0) fail("transfer_amount must be >= 0");
        if (!(r.instrument >= 0.0 && r.instrument <= 1.0)) fail("instrument must lie in [0,1]");
        for (double h : {r.teen_market_hours, r.teen_domestic_hours, r.parent_market_hours,
                         r.parent_domestic_hours}) {
            if (!(h >= 0.0)) fail("hour fields must be >= 0");
        }
        if (r.teen_wage && !(*r.teen_wage > 0.0)) fail("teen_wage, when present, must be > 0");
        if (!std::isfinite(r.teen_age) || !std::isfinite(r.nonlabor_income) ||
            !std::isfinite(r.parent_wage)) {
            fail("non-finite numeric field");
        }
        if (static_cast<std::size_t>(r.covariates.size()) != covariate_names_.size()) {
            fail("covariate vector length does not match declared covariate names");
        }
    }
}

bool Dataset::has_covariate(const std::string& name) const {
    for (const auto& n : covariate_names_) {
        if (n == name) return true;
    }
    return false;
}

Eigen::Index Dataset::covariate_index(const std::string& name) const {
    for (std::size_t i = 0; i < covariate_names_.size(); ++i) {
        if (covariate_names_[i] == name) return static_cast<Eigen::Index>(i);
    }
    throw ValidationError("no covariate named '" + name + "'");
}

Eigen::VectorXd Dataset::column(const std::string& name) const {
    const auto n = static_cast<Eigen::Index>(records_.size());
    Eigen::VectorXd out(n);
    const double nan = std::nan("");
    if (name == "teen_age") {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].teen_age;
    } else if (name == "schooling") {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].schooling;
    } else if (name == "teen_market_hours") {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].teen_market_hours;
    } else if (name == "teen_wage") {
        for (Eigen::Index i = 0; i < n; ++i)
            out(i) = records_[i].teen_wage ? *records_[i].teen_wage : nan;
    } else if (name == "teen_domestic_hours") {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].teen_domestic_hours;
    } else if (name == "parent_wage") {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].parent_wage;
    } else if (name == "parent_market_hours") {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].parent_market_hours;
    } else if (name == "parent_domestic_hours") {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].parent_domestic_hours;
    } else if (name == "nonlabor_income") {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].nonlabor_income;
    } else if (name == "treated") {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].treated;
    } else if (name == "transfer_amount") {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].transfer_amount;
    } else if (name == "instrument") {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].instrument;
    } else if (name == "year") {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].year;
    } else if (name == "cf_residual") {
        for (Eigen::Index i = 0; i < n; ++i)
            out(i) = records_[i].cf_residual ? *records_[i].cf_residual : nan;
    } else {
        const Eigen::Index j = covariate_index(name);
        for (Eigen::Index i = 0; i < n; ++i) out(i) = records_[i].covariates(j);
    }
    return out;
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
    std::vector<HouseholdRecord> recs;
    recs.reserve(rows.size());
    for (auto i : rows) {
        recs.push_back(records_.at(static_cast<std::size_t>(i)));
    }
    return Dataset(std::move(recs), covariate_names_, schema_version_);
}

Dataset Dataset::resampled(const std::vector<Eigen::Index>& rows) const {
    std::vector<HouseholdRecord> recs;
    recs.reserve(rows.size());
    std::unordered_map<std::string, int> occurrences;
    for (auto i : rows) {
        HouseholdRecord r = records_.at(static_cast<std::size_t>(i));
        const int c = ++occurrences[r.id];
        if (c > 1) {
            r.id += "#" + std::to_string(c);
        }
        recs.push_back(std::move(r));
    }
    return Dataset(std::move(recs), covariate_names_, schema_version_);
}

Dataset Dataset::with_cf_residuals(const Eigen::VectorXd& resid) const {
    if (static_cast<std::size_t>(resid.size()) != records_.size()) {
        throw ValidationError("with_cf_residuals: residual count does not match record count");
    }
    std::vector<HouseholdRecord> recs = records_;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].cf_residual = resid(static_cast<Eigen::Index>(i));
    }
    return Dataset(std::move(recs), covariate_names_, schema_version_);
}

Dataset Dataset::with_records(std::vector<HouseholdRecord> records) const {
    return Dataset(std::move(records), covariate_names_, schema_version_);
}

Dataset load_dataset(const std::string& path, const CsvSchema& schema) {
    const csv::Table t = csv::read_csv(path);

    std::vector<std::string> canonical(t.header.size());
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        auto it = schema.find(t.header[i]);
        canonical[i] = it == schema.end() ? t.header[i] : it->second;
    }

    auto find_col = [&](const std::string& name) {
        for (std::size_t i = 0; i < canonical.size(); ++i) {
            if (canonical[i] == name) return static_cast<int>(i);
        }
        return -1;
    };
    for (const auto& required :
         {"id", "teen_gender", "teen_age", "schooling", "teen_market_hours", "teen_wage",
          "teen_domestic_hours", "parent_wage", "parent_market_hours", "parent_domestic_hours",
          "nonlabor_income", "treated", "transfer_amount", "instrument"}) {
        if (find_col(required) < 0) {
            throw ValidationError("'" + path + "': required column '" + std::string(required) +
                                  "' missing from header");
        }
    }

    std::vector<std::string> covariate_names;
    std::vector<int> covariate_cols;
    for (std::size_t i = 0; i < canonical.size(); ++i) {
        if (!is_core_column(canonical[i])) {
            covariate_names.push_back(canonical[i]);
            covariate_cols.push_back(static_cast<int>(i));
        }
    }

    const int c_id = find_col("id"), c_year = find_col("year"), c_gender = find_col("teen_gender"),
              c_age = find_col("teen_age"), c_school = find_col("schooling"),
              c_tm = find_col("teen_market_hours"), c_tw = find_col("teen_wage"),
              c_twi = find_col("teen_wage_imputed"), c_th = find_col("teen_domestic_hours"),
              c_pw = find_col("parent_wage"), c_pm = find_col("parent_market_hours"),
              c_ph = find_col("parent_domestic_hours"), c_y = find_col("nonlabor_income"),
              c_d = find_col("treated"), c_ta = find_col("transfer_amount"),
              c_z = find_col("instrument"), c_cf = find_col("cf_residual");

    std::vector<HouseholdRecord> records;
    records.reserve(t.rows.size());
    for (std::size_t rix = 0; rix < t.rows.size(); ++rix) {
        const auto& row = t.rows[rix];
        const std::string where = path + ":" + std::to_string(rix + 2);
        try {
            HouseholdRecord r;
            r.id = row[c_id];
            r.year = c_year >= 0
                         ? static_cast<int>(csv::parse_double_strict(row[c_year], "year"))
                         : 0;
            r.teen_gender = gender_from_string(row[c_gender]);
            r.teen_age = csv::parse_double_strict(row[c_age], "teen_age");
            r.schooling = static_cast<int>(csv::parse_double_strict(row[c_school], "schooling"));
            r.teen_market_hours =
                csv::parse_double_strict(row[c_tm], "teen_market_hours");
            if (auto w = csv::parse_double(row[c_tw])) r.teen_wage = *w;
            if (c_twi >= 0) {
                r.teen_wage_imputed =
                    csv::parse_double_strict(row[c_twi], "teen_wage_imputed") != 0.0;
            }
            r.teen_domestic_hours = csv::parse_double_strict(row[c_th], "teen_domestic_hours");
            r.parent_wage = csv::parse_double_strict(row[c_pw], "parent_wage");
            r.parent_market_hours = csv::parse_double_strict(row[c_pm], "parent_market_hours");
            r.parent_domestic_hours = csv::parse_double_strict(row[c_ph], "parent_domestic_hours");
            r.nonlabor_income = csv::parse_double_strict(row[c_y], "nonlabor_income");
            r.treated = static_cast<int>(csv::parse_double_strict(row[c_d], "treated"));
            r.transfer_amount = csv::parse_double_strict(row[c_ta], "transfer_amount");
            r.instrument = csv::parse_double_strict(row[c_z], "instrument");
            if (c_cf >= 0) {
                if (auto v = csv::parse_double(row[c_cf])) r.cf_residual = *v;
            }
            r.covariates.resize(static_cast<Eigen::Index>(covariate_names.size()));
            for (std::size_t j = 0; j < covariate_cols.size(); ++j) {
                auto v = csv::parse_double(row[covariate_cols[j]]);
                r.covariates(static_cast<Eigen::Index>(j)) =
                    v ? *v : std::nan("");
            }
            records.push_back(std::move(r));
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
    }

    return Dataset(std::move(records), std::move(covariate_names));
}

void write_dataset(const std::string& path, const Dataset& d) {
    csv::Table t;
    t.header = {"id", "year", "teen_gender", "teen_age", "schooling", "teen_market_hours",
                "teen_wage", "teen_wage_imputed", "teen_domestic_hours", "parent_wage",
                "parent_market_hours", "parent_domestic_hours", "nonlabor_income", "treated",
                "transfer_amount", "instrument"};
    for (const auto& c : d.covariate_names()) t.header.push_back(c);
    t.header.push_back("cf_residual");

    for (const auto& r : d.records()) {
        std::vector<std::string> row;
        row.reserve(t.header.size());
        row.push_back(r.id);
        row.push_back(std::to_string(r.year));
        row.push_back(to_string(r.teen_gender));
        row.push_back(csv::format_double(r.teen_age));
        row.push_back(std::to_string(r.schooling));
        row.push_back(csv::format_double(r.teen_market_hours));
        row.push_back(r.teen_wage ? csv::format_double(*r.teen_wage) : "");
        row.push_back(r.teen_wage_imputed ? "1" : "0");
        row.push_back(csv::format_double(r.teen_domestic_hours));
        row.push_back(csv::format_double(r.parent_wage));
        row.push_back(csv::format_double(r.parent_market_hours));
        row.push_back(csv::format_double(r.parent_domestic_hours));
        row.push_back(csv::format_double(r.nonlabor_income));
        row.push_back(std::to_string(r.treated));
        row.push_back(csv::format_double(r.transfer_amount));
        row.push_back(csv::format_double(r.instrument));
        for (Eigen::Index j = 0; j < r.covariates.size(); ++j) {
            const double v = r.covariates(j);
            row.push_back(std::isnan(v) ? "" : csv::format_double(v));
        }
        row.push_back(r.cf_residual ? csv::format_double(*r.cf_residual) : "");
        t.rows.push_back(std::move(row));
    }
    csv::write_csv(path, t);
}

SelectionResult select_sample(const Dataset& d, const SelectionRules& rules) {
    SelectionReport report;
    report.examined = d.size();

    struct Rule {
        std::string name;
        std::function<bool(const HouseholdRecord&)> keep;
    };
    std::vector<Rule> active;

    if (rules.teen_age.active()) {
        active.push_back({"teen_age window",
                          [&](const HouseholdRecord& r) { return rules.teen_age.contains(r.teen_age); }});
    }
    if (rules.parent_age.active() && !rules.parent_age_covariate.empty()) {
        const Eigen::Index j = d.covariate_index(rules.parent_age_covariate);
        active.push_back({"parent_age window", [&rules, j](const HouseholdRecord& r) {
                              const double v = r.covariates(j);
                              return std::isfinite(v) && rules.parent_age.contains(v);
                          }});
    }
    if (rules.require_father_works) {
        active.push_back({"father works",
                          [](const HouseholdRecord& r) { return r.parent_market_hours > 0.0; }});
    }
    if (rules.parent_wage.active()) {
        active.push_back({"parent_wage trim", [&](const HouseholdRecord& r) {
                              return rules.parent_wage.contains(r.parent_wage);
                          }});
    }
    if (rules.teen_wage.active()) {
        active.push_back({"teen_wage trim", [&](const HouseholdRecord& r) {
                              return !r.teen_wage || rules.teen_wage.contains(*r.teen_wage);
                          }});
    }
    if (rules.income.active()) {
        active.push_back({"income trim", [&](const HouseholdRecord& r) {
                              return rules.income.contains(r.nonlabor_income);
                          }});
    }
    if (rules.market_hours.active()) {
        active.push_back({"market_hours trim", [&](const HouseholdRecord& r) {
                              return rules.market_hours.contains(r.parent_market_hours) &&
                                     (r.teen_market_hours == 0.0 ||
                                      rules.market_hours.contains(r.teen_market_hours));
                          }});
    }

    for (const auto& rule : active) {
        report.counts.push_back({rule.name, 0});
    }

    std::vector<Eigen::Index> kept;
    for (std::size_t i = 0; i < d.records().size(); ++i) {
        const auto& r = d.records()[i];
        bool keep = true;
        for (std::size_t k = 0; k < active.size(); ++k) {
            if (!active[k].keep(r)) {
                ++report.counts[k].dropped;
                keep = false;
                break;
            }
        }
        if (keep) kept.push_back(static_cast<Eigen::Index>(i));
    }
    report.kept = kept.size();
    if (kept.empty()) {
        throw ValidationError("select_sample: no records satisfy the selection rules");
    }
    return SelectionResult{d.subset(kept), std::move(report)};
}

Eigen::MatrixXd design_matrix(const Dataset& d, const std::vector<std::string>& columns,
                              const std::vector<Eigen::Index>& rows, bool add_intercept,
                              std::vector<std::string>* names_out) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto k = static_cast<Eigen::Index>(columns.size()) + (add_intercept ? 1 : 0);
    Eigen::MatrixXd X(n, k);
    Eigen::Index col = 0;
    std::vector<std::string> names;
    if (add_intercept) {
        X.col(0).setOnes();
        names.push_back("const");
        col = 1;
    }
    for (const auto& c : columns) {
        const Eigen::VectorXd full = d.column(c);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = full(rows[static_cast<std::size_t>(i)]);
            if (!std::isfinite(v)) {
                throw ValidationError("design_matrix: record '" +
                                      d.records()[static_cast<std::size_t>(rows[i])].id +
                                      "' has missing value in column '" + c + "'");
            }
            X(i, col) = v;
        }
        names.push_back(c);
        ++col;
    }
    if (names_out != nullptr) *names_out = std::move(names);
    return X;
}

std::vector<Eigen::Index> all_rows(const Dataset& d) {
    std::vector<Eigen::Index> rows(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) rows[i] = static_cast<Eigen::Index>(i);
    return rows;
}

} // namespace bargainlab
