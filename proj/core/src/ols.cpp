#include "bargainlab/ols.hpp"

#include <sstream>

#include "bargainlab/errors.hpp"

namespace bargainlab::stats {

FitResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const std::vector<std::string>& names) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (y.size() != n) {
        throw ValidationError("ols_fit: X and y row counts differ");
    }
    if (n <= k) {
        throw ValidationError("ols_fit: need more observations than regressors");
    }
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != k) {
        throw ValidationError("ols_fit: name count does not match column count");
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        // The columns the pivoting pushed past the numerical rank are the
        // ones expressible through the others; report them by name.
        std::ostringstream msg;
        msg << "ols_fit: singular design, collinear column(s):";
        const auto perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < k; ++j) {
            Eigen::Index col = perm(j);
            msg << ' ';
            if (!names.empty()) {
                msg << names[static_cast<std::size_t>(col)];
            } else {
                msg << col;
            }
        }
        throw EstimationError(msg.str());
    }

    FitResult out;
    out.names = names;
    out.coef = qr.solve(y);
    const Eigen::VectorXd resid = y - X * out.coef;
    const double sigma2 = resid.squaredNorm() / static_cast<double>(n - k);
    const Eigen::MatrixXd xtx = X.transpose() * X;
    out.cov = symmetrize(sigma2 * xtx.ldlt().solve(Eigen::MatrixXd::Identity(k, k)));
    out.n = static_cast<int>(n);
    out.converged = true;
    return out;
}

Eigen::VectorXd ols_residuals(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const FitResult& fit) {
    return y - X * fit.coef;
}

} // namespace bargainlab::stats
