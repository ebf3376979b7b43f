#pragma once

#include <string>
#include <vector>

#include "bargainlab/dataset.hpp"
#include "bargainlab/heckman.hpp"

namespace bargainlab::aux {

// Mincer wage equation with selection into work. Participation is wage
// observation itself: teens in school have no observed wage. Exclusion
// columns shift participation only.
struct WageModelSpec {
    std::vector<std::string> wage_covariates;      // age, schooling years, region/year
    std::vector<std::string> exclusion_covariates; // children counts, head age
    bool conditional_imputation = false;           // see impute_wages
};

struct WageModel {
    TeenGender gender = TeenGender::son;
    stats::FitResult participation;
    stats::FitResult wage_eq; // log wage on (const, wage_covariates, imr)
    double imr_coef = 0.0;
    double rho = 0.0;
    double sigma = 0.0;
    bool exclusion_ok = true;
    std::vector<std::string> wage_covariates;
    bool conditional_imputation = false;
};

// Two-step fit on a single-gender sample; throws if genders are mixed so
// a pooled call cannot silently average the two wage structures.
WageModel fit_wage_model(const Dataset& d, const WageModelSpec& spec);

// Fills missing teen wages with the lognormal-mean prediction
// exp(x'beta + sigma^2/2): the potential market wage of a student, not
// the selected one. With conditional_imputation the prediction is the
// exact lognormal mean given non-participation,
// exp(x'beta + sigma^2/2) * Phi(-z'gamma - rho sigma) / Phi(-z'gamma).
// Observed wages are never touched; imputed records carry the flag.
Dataset impute_wages(const Dataset& d, const WageModel& m);

} // namespace bargainlab::aux
