#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bargainlab/fit_result.hpp"

namespace bargainlab::stats {

// Ordinary least squares with the classical homoskedastic covariance
// sigma^2 (X'X)^-1. Throws EstimationError on a rank-deficient design,
// naming the columns that pivot past the numerical rank.
FitResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const std::vector<std::string>& names);

// Residuals y - X b for a fitted result (design must match the fit).
Eigen::VectorXd ols_residuals(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const FitResult& fit);

} // namespace bargainlab::stats
