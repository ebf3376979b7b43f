#pragma once

#include <Eigen/Dense>
#include <functional>

namespace bargainlab::stats {

using TransformFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct DeltaResult {
    Eigen::VectorXd value; // g(theta)
    Eigen::MatrixXd cov;   // J cov J'
    Eigen::VectorXd se;    // sqrt of the diagonal
};

// First-order (delta method) standard errors for a smooth transform of
// estimated parameters. The Jacobian is a central finite difference with
// step max(1e-6, 1e-6 |theta_k|) per coordinate. Throws EstimationError
// when g is non-finite near theta, naming the offending coordinate.
DeltaResult delta_method(const TransformFn& g, const Eigen::VectorXd& theta,
                         const Eigen::MatrixXd& cov);

} // namespace bargainlab::stats
