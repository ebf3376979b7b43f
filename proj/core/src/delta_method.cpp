#include "bargainlab/delta_method.hpp"

#include <cmath>
#include <string>

#include "bargainlab/errors.hpp"
#include "bargainlab/fit_result.hpp"

namespace bargainlab::stats {

DeltaResult delta_method(const TransformFn& g, const Eigen::VectorXd& theta,
                         const Eigen::MatrixXd& cov) {
    if (cov.rows() != theta.size() || cov.cols() != theta.size()) {
        throw ValidationError("delta_method: covariance dimensions do not match theta");
    }

    DeltaResult out;
    out.value = g(theta);
    if (!out.value.allFinite()) {
        throw EstimationError("delta_method: transform not finite at theta");
    }

    const Eigen::Index k = theta.size();
    const Eigen::Index m = out.value.size();
    Eigen::MatrixXd jac(m, k);
    Eigen::VectorXd t = theta;
    for (Eigen::Index j = 0; j < k; ++j) {
        const double h = std::max(1e-6, 1e-6 * std::abs(theta(j)));
        t(j) = theta(j) + h;
        const Eigen::VectorXd gp = g(t);
        t(j) = theta(j) - h;
        const Eigen::VectorXd gm = g(t);
        t(j) = theta(j);
        if (!gp.allFinite() || !gm.allFinite()) {
            throw EstimationError("delta_method: transform not finite near theta, coordinate " +
                                  std::to_string(j));
        }
        jac.col(j) = (gp - gm) / (2.0 * h);
    }

    out.cov = symmetrize(jac * cov * jac.transpose());
    out.se.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double v = out.cov(i, i);
        out.se(i) = v > 0.0 ? std::sqrt(v) : 0.0;
    }
    return out;
}

} // namespace bargainlab::stats
