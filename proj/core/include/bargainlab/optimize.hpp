#pragma once

#include <Eigen/Dense>
#include <functional>

#include "bargainlab/fit_result.hpp"

namespace bargainlab::stats {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

struct MaximizeOptions {
    int max_iter = 500;
    double grad_tol = 1e-6;   // infinity norm of the numeric gradient
    double rel_f_tol = 1e-10; // relative log-likelihood change per accepted step
    bool compute_cov = true;  // invert the finite-difference information matrix
    // Observer called once per iteration with (iter, f, |grad|_inf, step);
    // purely diagnostic, never affects the path.
    std::function<void(int, double, double, double)> trace;
};

// Quasi-Newton (BFGS) ascent on a log-likelihood with numeric gradients.
// Far from the optimum gradients use one-sided differences for speed and
// switch to central differences near convergence, so the stopping test is
// always made on a central-difference gradient. Non-convergence is
// reported through the converged flag, never silently.
FitResult maximize_loglik(const ObjectiveFn& loglik, const Eigen::VectorXd& theta0,
                          const MaximizeOptions& opts = {});

// Central finite-difference Hessian, step eps^(1/4) scaled per coordinate.
Eigen::MatrixXd fd_hessian(const ObjectiveFn& f, const Eigen::VectorXd& theta);

// Covariance from the observed information -H; falls back to an
// eigenvalue-floored inverse (and says so via the warning flag) when the
// Hessian is not negative definite at the reported optimum.
Eigen::MatrixXd information_covariance(const Eigen::MatrixXd& hessian,
                                       std::vector<std::string>* warnings);

} // namespace bargainlab::stats
