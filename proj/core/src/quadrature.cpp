#include "bargainlab/quadrature.hpp"

#include <cmath>

#include "bargainlab/errors.hpp"

namespace bargainlab::stats {

GaussHermiteRule gauss_hermite(int n) {
    if (n < 1 || n > 64) {
        throw ValidationError("gauss_hermite: node count must lie in [1, 64]");
    }

    GaussHermiteRule rule;
    if (n == 1) {
        rule.nodes = Eigen::VectorXd::Zero(1);
        rule.weights = Eigen::VectorXd::Ones(1);
        return rule;
    }

    // Jacobi matrix of the (physicists') Hermite recurrence: zero diagonal,
    // off-diagonal sqrt(k/2). Its eigenvalues are the nodes for weight
    // exp(-x^2); eigenvector first components give the weights.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double off = std::sqrt(0.5 * k);
        jacobi(k, k - 1) = off;
        jacobi(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    if (eig.info() != Eigen::Success) {
        throw EstimationError("gauss_hermite: eigen decomposition failed");
    }

    // Rescale from weight exp(-x^2) to the standard normal density:
    // node eta = sqrt(2) x, weight w / sqrt(pi). Weights then sum to 1.
    rule.nodes = std::sqrt(2.0) * eig.eigenvalues();
    rule.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        const double v0 = eig.eigenvectors()(0, k);
        rule.weights(k) = v0 * v0;
    }
    rule.weights /= rule.weights.sum();
    return rule;
}

} // namespace bargainlab::stats
