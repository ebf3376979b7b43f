#include "bargainlab/probit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bargainlab/distributions.hpp"
#include "bargainlab/errors.hpp"

namespace bargainlab::stats {

namespace {

void check_design(const Eigen::MatrixXd& X, const std::vector<std::string>& names) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) {
        std::ostringstream msg;
        msg << "probit_fit: singular design, collinear column(s):";
        const auto perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < X.cols(); ++j) {
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
}

} // namespace

double probit_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& d,
                     const Eigen::VectorXd& beta) {
    const Eigen::VectorXd z = X * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        // q in {-1,+1} folds both outcomes into Phi(q z).
        const double q = d(i) > 0.5 ? 1.0 : -1.0;
        ll += log_norm_cdf(q * z(i));
    }
    return ll;
}

FitResult probit_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& d,
                     const std::vector<std::string>& names) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (d.size() != n) {
        throw ValidationError("probit_fit: X and d row counts differ");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (d(i) != 0.0 && d(i) != 1.0) {
            throw ValidationError("probit_fit: response must be exactly 0 or 1");
        }
    }
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != k) {
        throw ValidationError("probit_fit: name count does not match column count");
    }
    check_design(X, names);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    const int max_iter = 100;
    double ll = probit_loglik(X, d, beta);

    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd z = X * beta;
        Eigen::VectorXd score = Eigen::VectorXd::Zero(k);
        Eigen::MatrixXd info = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double q = d(i) > 0.5 ? 1.0 : -1.0;
            const double lam = inv_mills(q * z(i)); // d logPhi(qz)/d(qz)
            const double w = lam * (lam + q * z(i)); // -d^2, always positive
            score.noalias() += (q * lam) * X.row(i).transpose();
            info.noalias() += w * (X.row(i).transpose() * X.row(i));
        }

        if (score.lpNorm<Eigen::Infinity>() < 1e-6) {
            // A vanishing score with every observation strictly on its
            // own side of the index means the likelihood has no interior
            // maximum; the data are separated and the "optimum" is just
            // where the tail probabilities ran out of double precision.
            double min_margin = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < n; ++i) {
                const double q = d(i) > 0.5 ? 1.0 : -1.0;
                min_margin = std::min(min_margin, q * z(i));
            }
            if (min_margin > 0.0) {
                throw EstimationError(
                    "probit_fit: perfect separation (all observations correctly "
                    "classified with margin " + std::to_string(min_margin) +
                    "); coefficients diverge");
            }
            FitResult out;
            out.names = names;
            out.coef = beta;
            out.cov = symmetrize(info.ldlt().solve(Eigen::MatrixXd::Identity(k, k)));
            out.loglik = ll;
            out.n = static_cast<int>(n);
            out.converged = true;
            return out;
        }

        Eigen::VectorXd step = info.ldlt().solve(score);
        // Halve until the likelihood improves; Newton can overshoot on
        // near-separated data.
        double t = 1.0;
        double ll_new = probit_loglik(X, d, beta + t * step);
        int halvings = 0;
        while (!(ll_new >= ll - 1e-12) && halvings < 50) {
            t *= 0.5;
            ll_new = probit_loglik(X, d, beta + t * step);
            ++halvings;
        }
        beta += t * step;
        ll = ll_new;

        if ((X * beta).lpNorm<Eigen::Infinity>() > 40.0) {
            throw EstimationError(
                "probit_fit: index diverging (|Xb| > 40); data appear perfectly "
                "separated, coefficients are not identified");
        }
    }
    throw EstimationError(
        "probit_fit: score norm still above 1e-6 after 100 Newton iterations; "
        "possible separation or ill-conditioned design");
}

} // namespace bargainlab::stats
