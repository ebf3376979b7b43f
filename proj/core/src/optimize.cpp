#include "bargainlab/optimize.hpp"

#include <cmath>
#include <limits>

#include "bargainlab/errors.hpp"

namespace bargainlab::stats {

namespace {

constexpr double kForwardStep = 1.4901161193847656e-08; // sqrt(eps)
constexpr double kCentralStep = 6.0554544523933429e-06; // cbrt(eps)
constexpr double kHessStep = 1.2207031250000000e-04;    // eps^(1/4)

// One-sided differences: k+1 evaluations, O(h) bias. Good enough while
// the gradient is large; never used for the convergence decision.
Eigen::VectorXd forward_gradient(const ObjectiveFn& f, const Eigen::VectorXd& theta,
                                 double f0) {
    Eigen::VectorXd g(theta.size());
    Eigen::VectorXd t = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double h = kForwardStep * std::max(1.0, std::abs(theta(i)));
        t(i) = theta(i) + h;
        g(i) = (f(t) - f0) / h;
        t(i) = theta(i);
    }
    return g;
}

Eigen::VectorXd central_gradient(const ObjectiveFn& f, const Eigen::VectorXd& theta) {
    Eigen::VectorXd g(theta.size());
    Eigen::VectorXd t = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double h = kCentralStep * std::max(1.0, std::abs(theta(i)));
        t(i) = theta(i) + h;
        const double fp = f(t);
        t(i) = theta(i) - h;
        const double fm = f(t);
        t(i) = theta(i);
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

} // namespace

Eigen::MatrixXd fd_hessian(const ObjectiveFn& f, const Eigen::VectorXd& theta) {
    const Eigen::Index k = theta.size();
    Eigen::MatrixXd hess(k, k);
    Eigen::VectorXd h(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        h(i) = kHessStep * std::max(1.0, std::abs(theta(i)));
    }
    const double f0 = f(theta);
    Eigen::VectorXd t = theta;
    for (Eigen::Index i = 0; i < k; ++i) {
        t(i) = theta(i) + h(i);
        const double fp = f(t);
        t(i) = theta(i) - h(i);
        const double fm = f(t);
        t(i) = theta(i);
        hess(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
    }
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i + 1; j < k; ++j) {
            t(i) = theta(i) + h(i);
            t(j) = theta(j) + h(j);
            const double fpp = f(t);
            t(j) = theta(j) - h(j);
            const double fpm = f(t);
            t(i) = theta(i) - h(i);
            const double fmm = f(t);
            t(j) = theta(j) + h(j);
            const double fmp = f(t);
            t(i) = theta(i);
            t(j) = theta(j);
            const double hij = (fpp - fpm - fmp + fmm) / (4.0 * h(i) * h(j));
            hess(i, j) = hij;
            hess(j, i) = hij;
        }
    }
    return hess;
}

Eigen::MatrixXd information_covariance(const Eigen::MatrixXd& hessian,
                                       std::vector<std::string>* warnings) {
    const Eigen::Index k = hessian.rows();
    const Eigen::MatrixXd info = symmetrize(-hessian);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
        bool ok = true;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (!(cov(i, i) > 0.0) || !std::isfinite(cov(i, i))) ok = false;
        }
        if (ok) return symmetrize(cov);
    }
    // Information matrix not positive definite: floor its spectrum so the
    // result is at least usable for reporting, and flag it.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
    const double floor = std::max(1e-12, 1e-10 * eig.eigenvalues().cwiseAbs().maxCoeff());
    Eigen::VectorXd inv_vals(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        inv_vals(i) = 1.0 / std::max(eig.eigenvalues()(i), floor);
    }
    if (warnings != nullptr) {
        warnings->push_back(
            "information matrix not positive definite at the optimum; "
            "covariance computed from an eigenvalue-floored inverse");
    }
    return symmetrize(eig.eigenvectors() * inv_vals.asDiagonal() *
                      eig.eigenvectors().transpose());
}

FitResult maximize_loglik(const ObjectiveFn& loglik, const Eigen::VectorXd& theta0,
                          const MaximizeOptions& opts) {
    const Eigen::Index k = theta0.size();
    Eigen::VectorXd theta = theta0;
    double f0 = loglik(theta);
    if (!std::isfinite(f0)) {
        throw ValidationError("maximize_loglik: objective not finite at the start value");
    }

    // Inverse-Hessian approximation of the negated objective (we minimize
    // -loglik internally, so h_inv stays positive definite).
    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(k, k);
    bool h_scaled = false; // rescale once from the first curvature pair
    bool central = true; // first gradient exact-ish so a converged start exits cleanly
    Eigen::VectorXd grad = central_gradient(loglik, theta);
    bool converged = false;
    int iter = 0;

    for (; iter < opts.max_iter; ++iter) {
        const double gnorm = grad.lpNorm<Eigen::Infinity>();
        if (gnorm < opts.grad_tol) {
            if (!central) {
                grad = central_gradient(loglik, theta);
                central = true;
                if (grad.lpNorm<Eigen::Infinity>() >= opts.grad_tol) {
                    continue; // forward-difference noise, keep going
                }
            }
            converged = true;
            break;
        }

        Eigen::VectorXd dir = h_inv * grad; // ascent direction
        double slope = grad.dot(dir);
        if (!(slope > 0.0)) {
            h_inv.setIdentity();
            dir = grad;
            slope = grad.squaredNorm();
        }

        // Backtracking Armijo line search on the ascent.
        double t = 1.0;
        double f_new = std::numeric_limits<double>::quiet_NaN();
        Eigen::VectorXd theta_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            theta_new = theta + t * dir;
            f_new = loglik(theta_new);
            if (std::isfinite(f_new) && f_new >= f0 + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // Try a steepest-ascent restart once before giving up.
            if (!dir.isApprox(grad)) {
                h_inv.setIdentity();
                continue;
            }
            break;
        }

        const double f_prev = f0;
        const Eigen::VectorXd s = theta_new - theta;
        theta = theta_new;
        f0 = f_new;
        if (opts.trace) opts.trace(iter, f0, gnorm, t);

        const bool want_central = grad.lpNorm<Eigen::Infinity>() < 0.5;
        Eigen::VectorXd grad_new = want_central ? central_gradient(loglik, theta)
                                                : forward_gradient(loglik, theta, f0);
        // y for the minimized objective -loglik
        const Eigen::VectorXd y = grad - grad_new;
        const double ys = y.dot(s);
        if (ys > 1e-12 * y.norm() * s.norm()) {
            if (!h_scaled) {
                // First curvature pair sets the scale of the identity guess;
                // without this the line search crawls when parameter scales
                // differ by orders of magnitude.
                h_inv *= ys / y.squaredNorm();
                h_scaled = true;
            }
            const Eigen::VectorXd hy = h_inv * y;
            const double yhy = y.dot(hy);
            const double rho = 1.0 / ys;
            // BFGS inverse update in expanded form.
            h_inv += ((ys + yhy) * rho * rho) * (s * s.transpose());
            const Eigen::MatrixXd cross = hy * s.transpose();
            h_inv -= rho * (cross + cross.transpose());
        }
        grad = grad_new;
        central = want_central;

        if (std::abs(f0 - f_prev) < opts.rel_f_tol * (1.0 + std::abs(f0))) {
            if (!central) {
                grad = central_gradient(loglik, theta);
                central = true;
            }
            // A tiny accepted step is only convergence if the surface is
            // actually flat; the guard absorbs finite-difference noise,
            // which grows with |f|. Otherwise the step was just badly
            // scaled: drop the curvature model and keep going.
            const double guard = std::max(1.0, 1e-4 * (1.0 + std::abs(f0)));
            if (grad.lpNorm<Eigen::Infinity>() < guard) {
                converged = true;
                break;
            }
            h_inv.setIdentity();
            h_scaled = false;
        }
    }

    FitResult out;
    out.coef = theta;
    out.loglik = f0;
    out.iterations = iter;
    out.converged = converged;
    if (!converged) {
        out.warnings.push_back(iter >= opts.max_iter
                                   ? "maximize_loglik: iteration limit reached"
                                   : "maximize_loglik: line search stalled");
    }
    if (opts.compute_cov) {
        out.cov = information_covariance(fd_hessian(loglik, theta), &out.warnings);
    } else {
        out.cov = Eigen::MatrixXd::Zero(k, k);
    }
    return out;
}

} // namespace bargainlab::stats
