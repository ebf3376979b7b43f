#include "bargainlab/heckman.hpp"

#include <algorithm>
#include <cmath>

#include "bargainlab/distributions.hpp"
#include "bargainlab/errors.hpp"
#include "bargainlab/ols.hpp"
#include "bargainlab/probit.hpp"

namespace bargainlab::stats {

HeckmanFit heckman_two_step(const Eigen::MatrixXd& Xp, const std::vector<std::string>& part_names,
                            const Eigen::VectorXd& part, const Eigen::MatrixXd& Xo,
                            const std::vector<std::string>& out_names, const Eigen::VectorXd& y) {
    const Eigen::Index n = Xp.rows();
    if (Xo.rows() != n || part.size() != n || y.size() != n) {
        throw ValidationError("heckman_two_step: row counts differ across inputs");
    }

    HeckmanFit fit;
    fit.participation = probit_fit(Xp, part, part_names);

    // Exclusion restriction: at least one participation column absent
    // from the outcome equation.
    fit.exclusion_ok = false;
    for (const auto& pn : part_names) {
        if (std::find(out_names.begin(), out_names.end(), pn) == out_names.end()) {
            fit.exclusion_ok = true;
            break;
        }
    }

    const Eigen::VectorXd index = Xp * fit.participation.coef;
    const Eigen::Index n1 = (part.array() > 0.5).count();
    if (n1 <= Xo.cols() + 1) {
        throw ValidationError("heckman_two_step: too few participants for the outcome step");
    }

    Eigen::MatrixXd Xsel(n1, Xo.cols() + 1);
    Eigen::VectorXd ysel(n1);
    Eigen::VectorXd lam(n1), zsel(n1);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (part(i) > 0.5) {
            Xsel.block(r, 0, 1, Xo.cols()) = Xo.row(i);
            lam(r) = inv_mills(index(i));
            zsel(r) = index(i);
            Xsel(r, Xo.cols()) = lam(r);
            ysel(r) = y(i);
            ++r;
        }
    }

    auto names2 = out_names;
    names2.push_back("imr");

    // A numerically zero Mills column would make the design singular;
    // drop it and fall back to plain OLS in that degenerate case.
    if (lam.cwiseAbs().maxCoeff() < 1e-12) {
        fit.outcome = ols_fit(Xsel.leftCols(Xo.cols()), ysel, out_names);
        fit.imr_coef = 0.0;
        const Eigen::VectorXd resid =
            ysel - Xsel.leftCols(Xo.cols()) * fit.outcome.coef;
        fit.sigma = std::sqrt(resid.squaredNorm() / double(n1));
        fit.rho = 0.0;
        return fit;
    }

    fit.outcome = ols_fit(Xsel, ysel, names2);
    if (!fit.exclusion_ok) {
        fit.outcome.warnings.push_back(
            "heckman_two_step: no exclusion restriction; selection term "
            "identified off functional form only");
    }
    fit.imr_coef = fit.outcome.coef(Xo.cols());

    // Error scale including the truncation correction
    //   sigma^2 = e'e/n1 + b_imr^2 * mean(delta),  delta = lam (lam + z),
    // then rho = b_imr / sigma restricted to the admissible interval.
    const Eigen::VectorXd resid = ysel - Xsel * fit.outcome.coef;
    const double delta_bar = (lam.array() * (lam.array() + zsel.array())).mean();
    const double s2 = resid.squaredNorm() / double(n1) +
                      fit.imr_coef * fit.imr_coef * delta_bar;
    fit.sigma = std::sqrt(std::max(s2, 0.0));
    fit.rho = fit.sigma > 0.0 ? std::clamp(fit.imr_coef / fit.sigma, -1.0, 1.0) : 0.0;
    return fit;
}

} // namespace bargainlab::stats
