#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bargainlab/fit_result.hpp"

namespace bargainlab::stats {

// Probit maximum likelihood via Newton-Raphson on the analytic score.
// Covariance is the inverse observed information at the optimum. Throws
// EstimationError on rank deficiency, apparent perfect separation, or
// failure to drive the score norm below 1e-6.
FitResult probit_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& d,
                     const std::vector<std::string>& names);

// Probit log-likelihood at an arbitrary coefficient vector; useful for
// cross-checking against the generic optimizer.
double probit_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& d,
                     const Eigen::VectorXd& beta);

} // namespace bargainlab::stats
