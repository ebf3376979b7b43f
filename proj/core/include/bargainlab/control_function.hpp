#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bargainlab/dataset.hpp"
#include "bargainlab/fit_result.hpp"

namespace bargainlab::aux {

// Non-labor income projected on the transfer amount (the excluded
// instrument of the structural stage), its square, and demographics; the
// residual becomes the control variable of the likelihood.
struct ControlFunctionSpec {
    std::string outcome = "nonlabor_income";
    std::string iv = "transfer_amount";
    std::vector<std::string> covariates;
};

struct ControlFunctionFit {
    stats::FitResult regression; // outcome on (const, iv, iv^2, covariates)
    Eigen::VectorXd residuals;   // one per record, mean zero
};

ControlFunctionFit fit_control_function(const Dataset& d, const ControlFunctionSpec& spec);

} // namespace bargainlab::aux
