#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "bargainlab/optimize.hpp"
#include "bargainlab/probit.hpp"
#include "bargainlab/rng.hpp"

using namespace bargainlab;
using namespace bargainlab::stats;

TEST_CASE("quasi-Newton ascent solves a quadratic from a distant start") {
    Eigen::VectorXd c(3);
    c << 1.0, -2.0, 3.0;
    auto f = [&](const Eigen::VectorXd& t) { return -0.5 * (t - c).squaredNorm(); };
    Eigen::VectorXd start(3);
    start << 10.0, -10.0, 0.0;
    MaximizeOptions opts;
    opts.max_iter = 50;
    const auto fit = maximize_loglik(f, start, opts);
    CHECK(fit.converged);
    CHECK((fit.coef - c).lpNorm<Eigen::Infinity>() < 1e-8);
    // Hessian is -I, so the information covariance is the identity.
    CHECK((fit.cov - Eigen::MatrixXd::Identity(3, 3)).lpNorm<Eigen::Infinity>() < 1e-4);
}

TEST_CASE("generic optimizer agrees with the dedicated probit fitter") {
    auto rng = make_stream(7171, 0);
    std::normal_distribution<double> normal;
    const int n = 400;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = normal(rng);
        X(i, 2) = normal(rng) > 0.5 ? 1.0 : 0.0;
        const double latent = 0.2 + 0.7 * X(i, 1) - 0.4 * X(i, 2) - normal(rng);
        d(i) = latent > 0.0 ? 1.0 : 0.0;
    }
    const auto direct = probit_fit(X, d, {"const", "x", "g"});
    auto ll = [&](const Eigen::VectorXd& beta) { return probit_loglik(X, d, beta); };
    const auto generic = maximize_loglik(ll, Eigen::VectorXd::Zero(3));
    CHECK(generic.converged);
    CHECK((generic.coef - direct.coef).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK(*generic.loglik == doctest::Approx(*direct.loglik).epsilon(1e-10));
    // Covariances come from observed information on both paths.
    CHECK((generic.cov - direct.cov).lpNorm<Eigen::Infinity>() < 1e-4);
}

TEST_CASE("flat objective converges immediately instead of looping") {
    auto f = [](const Eigen::VectorXd&) { return -1.0; };
    Eigen::VectorXd start(2);
    start << 0.3, -0.7;
    MaximizeOptions opts;
    opts.compute_cov = false;
    const auto fit = maximize_loglik(f, start, opts);
    CHECK(fit.converged);
    CHECK(fit.coef == start);
}

TEST_CASE("iteration cap is reported through the converged flag") {
    // Narrow curved valley (Rosenbrock flavour): two iterations are
    // never enough from a far corner.
    auto f = [](const Eigen::VectorXd& t) {
        const double a = 1.0 - t(0);
        const double b = t(1) - t(0) * t(0);
        return -(a * a + 100.0 * b * b);
    };
    Eigen::VectorXd start(2);
    start << -1.5, 2.0;
    MaximizeOptions opts;
    opts.max_iter = 2;
    opts.compute_cov = false;
    const auto fit = maximize_loglik(f, start, opts);
    CHECK(!fit.converged);
    CHECK(!fit.warnings.empty());
}

TEST_CASE("start value must have a finite objective") {
    auto f = [](const Eigen::VectorXd& t) { return std::log(t(0)); };
    Eigen::VectorXd bad(1);
    bad << -1.0;
    CHECK_THROWS(maximize_loglik(f, bad));
}
