#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bargainlab/dataset.hpp"
#include "bargainlab/fit_result.hpp"

namespace bargainlab::mte {

// First-stage specification: outcome-equation covariates plus the column
// holding the excluded instrument.
struct PropensitySpec {
    std::vector<std::string> covariates;
    std::string instrument = "instrument";
};

struct PropensityFit {
    stats::FitResult probit;      // treated on (const, covariates, instrument)
    Eigen::VectorXd scores;       // fitted P(X,Z), kept strictly inside (0,1)
    std::string instrument_name;
    bool weak_instrument = false; // first-stage |t| below the 5% critical value
};

PropensityFit estimate_propensity(const Dataset& d, const PropensitySpec& spec);

// Overlap of the treated and untreated score distributions, trimmed to
// 0.01-wide cells occupied by at least one unit of each arm.
struct CommonSupport {
    double lo = 0.0;
    double hi = 1.0;
    double share_retained = 1.0; // fraction of all records with score in [lo, hi]
};

CommonSupport common_support(const PropensityFit& fit, const Eigen::VectorXd& treated);

} // namespace bargainlab::mte
