#include <cmath>
#include <limits>
#include <string>

#include "bargainlab/errors.hpp"
#include "bargainlab/household_model.hpp"

namespace bargainlab::household {

namespace {

struct ChainPoint {
    double gamma_p = 0.0, gamma_y = 0.0;
    double F = 0.0, psi_t = 0.0, psi_p = 0.0, psi_y = 0.0;
    double theta_rho = 0.0, theta_w = 0.0;
    double other = 0.0;
    double At = 0.0, Ap = 0.0;
};

double psi_t_at(double a, double b, double F) {
    return b / (a - b) * (a - 1.0 - a / F);
}

// Core of Appendix-style recovery: complete the work regime through the
// collective restrictions, solve the quadratic for F', keep the root
// meeting |(1 - F') psi_t| < 1, then unwind the psi block and the theta
// substitutions. select_near, when finite, picks the root closest to a
// previous solution instead of re-testing feasibility; the delta-method
// Jacobian uses it to stay on one branch across perturbations.
ChainPoint chain(double at, double ay, double Ay, double gamma_p, double gamma_y,
                 double ap_star, double delta, double alpha, bool with_wage_block,
                 double select_near = std::numeric_limits<double>::quiet_NaN()) {
    ChainPoint out;
    out.gamma_p = gamma_p;
    out.gamma_y = gamma_y;
    out.At = at - (Ay - ay) / gamma_y;
    const double a = out.At / Ay;
    const double b = at / ay;
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw EstimationError("recover_sharing_rule: regime ratios are not finite; "
                              "check A_y, a_y and gamma_y");
    }
    if (std::abs(a - b) < 1e-10) {
        throw EstimationError("recover_sharing_rule: degenerate regimes (A_t/A_y equals "
                              "a_t/a_y); F' is unidentified");
    }

    const double gba = gamma_y * b * a;
    const double qa = gba - 1.0 + a - gamma_y * b;
    const double qb = -b + 1.0 - 2.0 * gba + gamma_y * a - a;
    const double qc = b + gba;

    double r1, r2;
    if (std::abs(qa) < 1e-14) {
        if (std::abs(qb) < 1e-14) {
            throw EstimationError("recover_sharing_rule: F' equation vanished");
        }
        r1 = r2 = -qc / qb;
    } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc < 0.0) {
            throw EstimationError("recover_sharing_rule: no real root for F' "
                                  "(discriminant " + std::to_string(disc) + ")");
        }
        const double s = qb >= 0.0 ? 1.0 : -1.0;
        const double q = -0.5 * (qb + s * std::sqrt(disc));
        r1 = q / qa;
        r2 = std::abs(q) > 0.0 ? qc / q : q / qa;
    }

    double F;
    if (std::isfinite(select_near)) {
        F = std::abs(r1 - select_near) <= std::abs(r2 - select_near) ? r1 : r2;
        out.other = F == r1 ? r2 : r1;
    } else {
        const auto feasible = [&](double r) {
            if (!std::isfinite(r) || r == 0.0) return false;
            return std::abs((1.0 - r) * psi_t_at(a, b, r)) < 1.0;
        };
        const bool ok1 = feasible(r1);
        const bool ok2 = feasible(r2) && r2 != r1;
        if (!ok1 && !ok2) {
            throw EstimationError("recover_sharing_rule: neither root satisfies the "
                                  "sufficiency bound |(1-F')psi_t| < 1; roots " +
                                  std::to_string(r1) + " and " + std::to_string(r2));
        }
        if (ok1 && ok2) {
            throw EstimationError("recover_sharing_rule: both roots satisfy the "
                                  "sufficiency bound (" + std::to_string(r1) + " and " +
                                  std::to_string(r2) + "); select one manually");
        }
        F = ok1 ? r1 : r2;
        out.other = ok1 ? r2 : r1;
    }

    out.F = F;
    out.psi_t = psi_t_at(a, b, F);
    out.psi_y = (a - 1.0 - b / F) / (a - b);
    out.psi_p = gamma_p / gamma_y * out.psi_y;
    out.theta_rho = Ay / (1.0 - out.psi_y);
    if (!std::isfinite(out.theta_rho)) {
        throw EstimationError("recover_sharing_rule: psi_y = 1 leaves theta_p_rho "
                              "undefined");
    }
    if (with_wage_block) {
        out.Ap = ap_star + (Ay - ay) * gamma_p / gamma_y;
        out.theta_w = out.Ap - delta * alpha / (1.0 - alpha) + out.theta_rho * out.psi_p;
    }
    return out;
}

} // namespace

StructuralParams recover_sharing_rule(double at, double ay, double Ay, double gamma_p,
                                      double gamma_y) {
    const ChainPoint c = chain(at, ay, Ay, gamma_p, gamma_y, 0.0, 0.0, 0.5, false);
    StructuralParams s;
    s.gamma_p = c.gamma_p;
    s.gamma_y = c.gamma_y;
    s.F_prime = c.F;
    s.psi_t = c.psi_t;
    s.psi_p = c.psi_p;
    s.psi_y = c.psi_y;
    s.theta_p_rho = c.theta_rho;
    s.At_completed = c.At;
    s.other_root = c.other;
    return s;
}

StructuralParams recover_sharing_rule(const ReducedFormEstimates& est) {
    if (est.kind != ModelKind::collective) {
        throw ValidationError("recover_sharing_rule: needs a collective fit, got " +
                              to_string(est.kind));
    }
    if (est.reduced.size() != 11) {
        throw ValidationError("recover_sharing_rule: reduced block missing");
    }

    const auto eval = [&](const Eigen::VectorXd& v, double near) {
        const double bt = v(8), bp = v(9), by = v(10);
        if (std::abs(bt) < 1e-10) {
            throw EstimationError("recover_sharing_rule: bt is zero; the frontier "
                                  "ratios are undefined");
        }
        return chain(v(4), v(5), v(2), -bp / bt, -by / bt, v(3), v(6),
                     est.params.alpha, true, near);
    };

    const ChainPoint base = eval(est.reduced, std::numeric_limits<double>::quiet_NaN());

    StructuralParams s;
    s.alpha = est.params.alpha;
    s.gamma_p = base.gamma_p;
    s.gamma_y = base.gamma_y;
    s.F_prime = base.F;
    s.psi_t = base.psi_t;
    s.psi_p = base.psi_p;
    s.psi_y = base.psi_y;
    s.theta_p_rho = base.theta_rho;
    s.theta_p_w = base.theta_w;
    s.At_completed = base.At;
    s.Ap_star_completed = base.Ap;
    s.other_root = base.other;

    if (est.cov_reduced.size() == 0 || est.cov_reduced.cwiseAbs().maxCoeff() == 0.0) {
        return s; // point estimates only; no covariance was computed
    }

    const auto pack8 = [](const ChainPoint& c) {
        Eigen::VectorXd v(8);
        v << c.gamma_p, c.gamma_y, c.F, c.psi_t, c.psi_p, c.psi_y, c.theta_rho, c.theta_w;
        return v;
    };
    Eigen::MatrixXd J(8, 11);
    Eigen::VectorXd t = est.reduced;
    for (Eigen::Index i = 0; i < 11; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(est.reduced(i)));
        t(i) = est.reduced(i) + h;
        const Eigen::VectorXd up = pack8(eval(t, base.F));
        t(i) = est.reduced(i) - h;
        const Eigen::VectorXd dn = pack8(eval(t, base.F));
        t(i) = est.reduced(i);
        J.col(i) = (up - dn) / (2.0 * h);
    }
    const Eigen::MatrixXd cov8 = J * est.cov_reduced * J.transpose();
    const auto se_at = [&](int i) {
        const double v = cov8(i, i);
        return v > 0.0 ? std::sqrt(v) : 0.0;
    };
    s.has_ses = true;
    s.se_gamma_p = se_at(0);
    s.se_gamma_y = se_at(1);
    s.se_F_prime = se_at(2);
    s.se_psi_t = se_at(3);
    s.se_psi_p = se_at(4);
    s.se_psi_y = se_at(5);
    s.se_theta_p_rho = se_at(6);
    s.se_theta_p_w = se_at(7);
    return s;
}

} // namespace bargainlab::household
