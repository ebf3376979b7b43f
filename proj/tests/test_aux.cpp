#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "bargainlab/control_function.hpp"
#include "bargainlab/dataset.hpp"
#include "bargainlab/distributions.hpp"
#include "bargainlab/errors.hpp"
#include "bargainlab/ols.hpp"
#include "bargainlab/rng.hpp"
#include "bargainlab/wage_model.hpp"

using namespace bargainlab;

namespace {

HouseholdRecord wage_record(const std::string& id, double age, double edu, double excl,
                            TeenGender g = TeenGender::son) {
    HouseholdRecord r;
    r.id = id;
    r.year = 2016;
    r.teen_gender = g;
    r.teen_age = age;
    r.schooling = 1;
    r.teen_market_hours = 0.0;
    r.teen_domestic_hours = 8.0;
    r.parent_wage = 1.4;
    r.parent_market_hours = 46.0;
    r.parent_domestic_hours = 12.0;
    r.nonlabor_income = 0.3;
    r.treated = 0;
    r.transfer_amount = 0.0;
    r.instrument = 0.2;
    r.covariates.resize(2);
    r.covariates << edu, excl;
    return r;
}

const std::vector<std::string> kWageCovNames{"edu_years", "excl_children"};

// Selection DGP: log wage 0.1 + 0.03 age + 0.08 edu + eps, participation
// driven by the exclusion variable, corr(eps, v) = 0.5.
Dataset mincer_sample(int n, std::uint64_t seed, double rho) {
    auto rng = make_stream(seed, 0);
    std::uniform_real_distribution<double> uage(15.0, 19.0);
    std::uniform_int_distribution<int> uedu(6, 11);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = 0.4;
    std::vector<HouseholdRecord> recs;
    for (int i = 0; i < n; ++i) {
        const double age = uage(rng);
        const double edu = uedu(rng);
        const double excl = normal(rng);
        const double v = normal(rng);
        const double w = normal(rng);
        const double eps = sigma * (rho * v + std::sqrt(1.0 - rho * rho) * w);
        auto r = wage_record("m" + std::to_string(i + 1), age, edu, excl);
        const bool works = -4.3 + 0.2 * age + 0.05 * edu + 0.8 * excl + v > 0.0;
        if (works) {
            r.teen_wage = std::exp(0.1 + 0.03 * age + 0.08 * edu + eps);
            r.schooling = 0;
            r.teen_market_hours = 40.0;
        }
        recs.push_back(std::move(r));
    }
    return Dataset(std::move(recs), kWageCovNames);
}

} // namespace

TEST_CASE("two-step wage model recovers the Mincer slopes") {
    const Dataset d = mincer_sample(15000, 401, 0.5);
    aux::WageModelSpec spec;
    spec.wage_covariates = {"teen_age", "edu_years"};
    spec.exclusion_covariates = {"excl_children"};
    const auto m = aux::fit_wage_model(d, spec);

    CHECK(m.exclusion_ok);
    CHECK(std::abs(m.wage_eq.coef_of("teen_age") - 0.03) <
          3.0 * m.wage_eq.se_of("teen_age"));
    CHECK(std::abs(m.wage_eq.coef_of("edu_years") - 0.08) <
          3.0 * m.wage_eq.se_of("edu_years"));
    CHECK(std::abs(m.participation.coef_of("excl_children") - 0.8) <
          3.0 * m.participation.se_of("excl_children"));
    CHECK(m.rho > 0.25);
    CHECK(m.rho < 0.75);
    CHECK(m.sigma == doctest::Approx(0.4).epsilon(0.15));
    CHECK(m.imr_coef == doctest::Approx(m.rho * m.sigma).epsilon(1e-9));
}

TEST_CASE("uncorrelated errors leave the selection term insignificant") {
    const Dataset d = mincer_sample(15000, 402, 0.0);
    aux::WageModelSpec spec;
    spec.wage_covariates = {"teen_age", "edu_years"};
    spec.exclusion_covariates = {"excl_children"};
    const auto m = aux::fit_wage_model(d, spec);
    CHECK(std::abs(m.imr_coef) < 2.5 * m.wage_eq.se_of("imr"));

    // Plain OLS on the participants should sit next to the corrected fit.
    std::vector<Eigen::Index> workers;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.records()[i].teen_wage.has_value()) {
            workers.push_back(static_cast<Eigen::Index>(i));
        }
    }
    const Eigen::MatrixXd X = design_matrix(d, spec.wage_covariates, workers, true);
    Eigen::VectorXd y(workers.size());
    for (std::size_t i = 0; i < workers.size(); ++i) {
        y(i) = std::log(*d.records()[static_cast<std::size_t>(workers[i])].teen_wage);
    }
    const auto ols = stats::ols_fit(X, y, {"const", "teen_age", "edu_years"});
    CHECK(std::abs(m.wage_eq.coef_of("edu_years") - ols.coef_of("edu_years")) < 0.02);
}

TEST_CASE("mixed genders are refused") {
    std::vector<HouseholdRecord> recs;
    for (int i = 0; i < 6; ++i) {
        auto r = wage_record("m" + std::to_string(i + 1), 16.0, 8.0, 0.0,
                             i % 2 ? TeenGender::son : TeenGender::daughter);
        if (i < 3) r.teen_wage = 1.0;
        recs.push_back(std::move(r));
    }
    const Dataset d(std::move(recs), kWageCovNames);
    aux::WageModelSpec spec;
    spec.wage_covariates = {"edu_years"};
    CHECK_THROWS_AS(aux::fit_wage_model(d, spec), ValidationError);
}

TEST_CASE("a non-positive observed wage never enters a dataset") {
    std::vector<HouseholdRecord> recs;
    for (int i = 0; i < 8; ++i) {
        auto r = wage_record("m" + std::to_string(i + 1), 15.0 + i * 0.5, 6.0 + i * 0.5,
                             i - 4.0);
        if (i % 2) r.teen_wage = i == 5 ? 0.0 : 1.2;
        recs.push_back(std::move(r));
    }
    try {
        Dataset d(std::move(recs), kWageCovNames);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("m6") != std::string::npos);
    }
}

TEST_CASE("missing exclusion restriction is flagged, not fatal") {
    const Dataset d = mincer_sample(2000, 403, 0.5);
    aux::WageModelSpec spec;
    spec.wage_covariates = {"teen_age", "edu_years"};
    const auto m = aux::fit_wage_model(d, spec);
    CHECK_FALSE(m.exclusion_ok);
}

TEST_CASE("imputation fills exactly the missing wages and flags them") {
    const Dataset d = mincer_sample(4000, 404, 0.5);
    aux::WageModelSpec spec;
    spec.wage_covariates = {"teen_age", "edu_years"};
    spec.exclusion_covariates = {"excl_children"};
    const auto m = aux::fit_wage_model(d, spec);
    const Dataset filled = aux::impute_wages(d, m);

    REQUIRE(filled.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& before = d.records()[i];
        const auto& after = filled.records()[i];
        REQUIRE(after.teen_wage.has_value());
        if (before.teen_wage.has_value()) {
            CHECK(*after.teen_wage == *before.teen_wage);
            CHECK_FALSE(after.teen_wage_imputed);
        } else {
            CHECK(*after.teen_wage > 0.0);
            CHECK(after.teen_wage_imputed);
        }
    }

    // Idempotence: a second pass changes nothing.
    const Dataset again = aux::impute_wages(filled, m);
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(*again.records()[i].teen_wage == *filled.records()[i].teen_wage);
        CHECK(again.records()[i].teen_wage_imputed == filled.records()[i].teen_wage_imputed);
    }
}

TEST_CASE("imputed log wage is the linear prediction plus half sigma squared") {
    std::vector<HouseholdRecord> recs;
    for (int i = 0; i < 5; ++i) {
        recs.push_back(wage_record("m" + std::to_string(i + 1), 16.0, 6.0 + i, 0.0));
    }
    const Dataset d(std::move(recs), kWageCovNames);

    aux::WageModel m;
    m.wage_covariates = {"edu_years"};
    m.wage_eq.names = {"const", "edu_years", "imr"};
    m.wage_eq.coef.resize(3);
    m.wage_eq.coef << 0.2, 0.08, 0.5; // imr part must not leak into prediction
    m.sigma = 0.4;

    const Dataset filled = aux::impute_wages(d, m);
    for (int i = 0; i < 5; ++i) {
        const double expect = 0.2 + 0.08 * (6.0 + i) + 0.5 * 0.4 * 0.4;
        CHECK(std::log(*filled.records()[i].teen_wage) ==
              doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("conditional imputation applies the exact truncation factor") {
    std::vector<HouseholdRecord> recs;
    recs.push_back(wage_record("m1", 16.0, 9.0, 0.4));
    const Dataset d(std::move(recs), kWageCovNames);

    aux::WageModel m;
    m.wage_covariates = {"edu_years"};
    m.wage_eq.names = {"const", "edu_years", "imr"};
    m.wage_eq.coef.resize(3);
    m.wage_eq.coef << 0.2, 0.08, 0.1;
    m.sigma = 0.4;
    m.rho = 0.5;
    m.participation.names = {"const", "excl_children"};
    m.participation.coef.resize(2);
    m.participation.coef << -0.3, 0.6;
    m.conditional_imputation = true;

    const Dataset filled = aux::impute_wages(d, m);
    const double idx = -0.3 + 0.6 * 0.4;
    const double uncond = std::exp(0.2 + 0.08 * 9.0 + 0.5 * 0.4 * 0.4);
    const double expect = uncond * stats::norm_cdf(-idx - 0.5 * 0.4) / stats::norm_cdf(-idx);
    CHECK(*filled.records()[0].teen_wage == doctest::Approx(expect).epsilon(1e-12));
    CHECK(*filled.records()[0].teen_wage < uncond);
}

TEST_CASE("imputation reports the record whose covariate is missing") {
    std::vector<HouseholdRecord> recs;
    recs.push_back(wage_record("m1", 16.0, 8.0, 0.0));
    auto bad = wage_record("m2", 16.0, 8.0, 0.0);
    bad.covariates(0) = std::numeric_limits<double>::quiet_NaN();
    recs.push_back(std::move(bad));
    const Dataset d(std::move(recs), kWageCovNames);

    aux::WageModel m;
    m.wage_covariates = {"edu_years"};
    m.wage_eq.names = {"const", "edu_years", "imr"};
    m.wage_eq.coef.resize(3);
    m.wage_eq.coef << 0.2, 0.08, 0.0;
    m.sigma = 0.4;
    try {
        aux::impute_wages(d, m);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("m2") != std::string::npos);
    }
}

TEST_CASE("control function recovers the quadratic transfer projection") {
    auto rng = make_stream(405, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uamt(0.0, 4.0);
    std::vector<HouseholdRecord> recs;
    for (int i = 0; i < 4000; ++i) {
        auto r = wage_record("m" + std::to_string(i + 1), 16.0, 8.0, normal(rng));
        r.treated = i % 2;
        r.transfer_amount = r.treated ? uamt(rng) : 0.0;
        r.nonlabor_income = 1.0 + 2.0 * r.transfer_amount -
                            0.1 * r.transfer_amount * r.transfer_amount +
                            0.5 * r.covariates(1) + 0.3 * normal(rng);
        recs.push_back(std::move(r));
    }
    const Dataset d(std::move(recs), kWageCovNames);

    aux::ControlFunctionSpec spec;
    spec.covariates = {"excl_children"};
    const auto fit = aux::fit_control_function(d, spec);

    CHECK(fit.regression.has("transfer_amount_sq"));
    CHECK(std::abs(fit.regression.coef_of("transfer_amount") - 2.0) <
          3.0 * fit.regression.se_of("transfer_amount"));
    CHECK(std::abs(fit.regression.coef_of("transfer_amount_sq") + 0.1) <
          3.0 * fit.regression.se_of("transfer_amount_sq"));

    REQUIRE(fit.residuals.size() == static_cast<Eigen::Index>(d.size()));
    CHECK(std::abs(fit.residuals.mean()) < 1e-10);

    // OLS identity: residuals orthogonal to every regressor.
    const Eigen::VectorXd iv = d.column("transfer_amount");
    const Eigen::VectorXd x = d.column("excl_children");
    const auto corr = [&](const Eigen::VectorXd& a) {
        const Eigen::VectorXd ac = a.array() - a.mean();
        const Eigen::VectorXd rc = fit.residuals.array() - fit.residuals.mean();
        return std::abs(ac.dot(rc)) / std::sqrt(ac.squaredNorm() * rc.squaredNorm());
    };
    CHECK(corr(iv) < 1e-10);
    CHECK(corr(iv.cwiseProduct(iv)) < 1e-10);
    CHECK(corr(x) < 1e-10);

    // Residuals travel on the dataset under the canonical column name.
    const Dataset with = d.with_cf_residuals(fit.residuals);
    const Eigen::VectorXd round = with.column("cf_residual");
    CHECK((round - fit.residuals).lpNorm<Eigen::Infinity>() == 0.0);
}
