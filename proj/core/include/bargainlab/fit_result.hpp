#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace bargainlab::stats {

// Common container for every estimator output: named coefficients, a
// symmetric covariance, and convergence bookkeeping. Estimators that have
// no likelihood leave loglik empty.
struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd coef;
    Eigen::MatrixXd cov;
    std::optional<double> loglik;
    int n = 0;
    int iterations = 0;
    bool converged = true;
    std::vector<std::string> warnings;

    double se(Eigen::Index k) const;
    Eigen::Index index_of(const std::string& name) const; // throws if absent
    double coef_of(const std::string& name) const;
    double se_of(const std::string& name) const;
    bool has(const std::string& name) const;
};

// Force exact symmetry on a covariance computed by inversion; the halves
// can drift apart by rounding and downstream code assumes cov == cov^T.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

} // namespace bargainlab::stats
