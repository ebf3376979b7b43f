#pragma once

#include <Eigen/Dense>

namespace bargainlab::stats {

// Quadrature rule for integrals against the standard normal density:
//   integral f(eta) phi(eta) d eta  ~=~  sum_k weight(k) * f(node(k)).
// Weights sum to one; the rule is exact for polynomials of degree 2n-1.
struct GaussHermiteRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

// Gauss-Hermite nodes/weights rescaled to the phi weight, computed by the
// Golub-Welsch eigenvalue method. n must lie in [1, 64].
GaussHermiteRule gauss_hermite(int n);

} // namespace bargainlab::stats
