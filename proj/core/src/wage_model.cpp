#include "bargainlab/wage_model.hpp"

#include <cmath>
#include <sstream>

#include "bargainlab/distributions.hpp"
#include "bargainlab/errors.hpp"

namespace bargainlab::aux {

namespace {

void require_single_gender(const Dataset& d) {
    if (d.size() == 0) throw ValidationError("fit_wage_model: empty dataset");
    const TeenGender g = d.records().front().teen_gender;
    for (const auto& r : d.records()) {
        if (r.teen_gender != g) {
            throw ValidationError("fit_wage_model: mixed genders in sample (record " +
                                  r.id + "); fit one model per gender");
        }
    }
}

} // namespace

WageModel fit_wage_model(const Dataset& d, const WageModelSpec& spec) {
    require_single_gender(d);
    const auto rows = all_rows(d);

    std::vector<std::string> part_cols = spec.wage_covariates;
    part_cols.insert(part_cols.end(), spec.exclusion_covariates.begin(),
                     spec.exclusion_covariates.end());
    std::vector<std::string> part_names, out_names;
    const Eigen::MatrixXd Xp = design_matrix(d, part_cols, rows, true, &part_names);
    const Eigen::MatrixXd Xo =
        design_matrix(d, spec.wage_covariates, rows, true, &out_names);

    Eigen::VectorXd part(d.size());
    Eigen::VectorXd logw = Eigen::VectorXd::Zero(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& r = d.records()[i];
        part(i) = r.teen_wage.has_value() ? 1.0 : 0.0;
        // Positivity is a Dataset invariant, so the log is always finite.
        if (r.teen_wage.has_value()) logw(i) = std::log(*r.teen_wage);
    }

    const stats::HeckmanFit h =
        stats::heckman_two_step(Xp, part_names, part, Xo, out_names, logw);

    WageModel m;
    m.gender = d.records().front().teen_gender;
    m.participation = h.participation;
    m.wage_eq = h.outcome;
    m.imr_coef = h.imr_coef;
    m.rho = h.rho;
    m.sigma = h.sigma;
    m.exclusion_ok = h.exclusion_ok;
    m.wage_covariates = spec.wage_covariates;
    m.conditional_imputation = spec.conditional_imputation;
    return m;
}

Dataset impute_wages(const Dataset& d, const WageModel& m) {
    std::vector<Eigen::Index> missing;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!d.records()[i].teen_wage.has_value()) {
            missing.push_back(static_cast<Eigen::Index>(i));
        }
    }
    if (missing.empty()) return d;

    const Eigen::MatrixXd Xo = design_matrix(d, m.wage_covariates, missing, true);
    Eigen::VectorXd logw = Xo * m.wage_eq.coef.head(Xo.cols());
    logw.array() += 0.5 * m.sigma * m.sigma;

    Eigen::VectorXd adjust = Eigen::VectorXd::Ones(missing.size());
    if (m.conditional_imputation) {
        std::vector<std::string> part_cols(m.participation.names.begin() + 1,
                                           m.participation.names.end());
        const Eigen::MatrixXd Xp = design_matrix(d, part_cols, missing, true);
        const Eigen::VectorXd idx = Xp * m.participation.coef;
        const double shift = m.rho * m.sigma;
        for (Eigen::Index i = 0; i < idx.size(); ++i) {
            const double denom = stats::norm_cdf(-idx(i));
            if (denom <= 0.0) {
                throw EstimationError(
                    "impute_wages: participation probability is one for record " +
                    d.records()[static_cast<std::size_t>(missing[i])].id +
                    "; conditional imputation undefined");
            }
            adjust(i) = stats::norm_cdf(-idx(i) - shift) / denom;
        }
    }

    std::vector<HouseholdRecord> recs = d.records();
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(missing.size()); ++i) {
        auto& r = recs[static_cast<std::size_t>(missing[i])];
        r.teen_wage = std::exp(logw(i)) * adjust(i);
        r.teen_wage_imputed = true;
    }
    return d.with_records(std::move(recs));
}

} // namespace bargainlab::aux
