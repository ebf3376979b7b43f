#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bargainlab/fit_result.hpp"

namespace bargainlab::stats {

// Two-step selection estimator. participation/outcome designs cover the
// same n rows; outcome rows where part == 0 are ignored. The outcome fit
// gains an extra "imr" column holding the inverse Mills ratio evaluated
// at the step-one index.
struct HeckmanFit {
    FitResult participation;
    FitResult outcome;
    double imr_coef = 0.0;
    double sigma = 0.0; // outcome error scale, Heckman-corrected
    double rho = 0.0;   // implied error correlation, clamped to [-1, 1]
    bool exclusion_ok = true;
};

// When the participation design adds no column beyond the outcome design
// there is no exclusion restriction and identification rides on the
// normality-driven curvature of the Mills ratio alone; the result is
// returned but flagged (exclusion_ok=false plus a warning string).
HeckmanFit heckman_two_step(const Eigen::MatrixXd& Xp, const std::vector<std::string>& part_names,
                            const Eigen::VectorXd& part, const Eigen::MatrixXd& Xo,
                            const std::vector<std::string>& out_names, const Eigen::VectorXd& y);

} // namespace bargainlab::stats
