#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "bargainlab/distributions.hpp"
#include "bargainlab/errors.hpp"
#include "bargainlab/probit.hpp"
#include "bargainlab/rng.hpp"

using namespace bargainlab;
using namespace bargainlab::stats;

TEST_CASE("constant-only probit inverts the success share") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(100, 1);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(100);
    d.head(30).setOnes();
    const auto fit = probit_fit(X, d, {"const"});
    CHECK(fit.coef(0) == doctest::Approx(-0.5244005127080407).epsilon(1e-7));
    CHECK(fit.converged);
    CHECK(*fit.loglik < 0.0);
}

TEST_CASE("probit intercept vanishes for sign-symmetric data") {
    // Data invariant under (x, d) -> (-x, 1-d): the likelihood is then
    // symmetric in the intercept, so it must come out zero.
    Eigen::MatrixXd X(6, 2);
    Eigen::VectorXd d(6);
    X << 1, 1, 1, -1, 1, 2, 1, -2, 1, 1, 1, -1;
    d << 1, 0, 1, 0, 0, 1;
    const auto fit = probit_fit(X, d, {"const", "x"});
    CHECK(fit.coef(0) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("probit matches a brute-force grid maximizer on a 20-row fixture") {
    auto rng = make_stream(424242, 0);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd X(20, 2);
    Eigen::VectorXd d(20);
    for (int i = 0; i < 20; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = normal(rng);
        const double latent = -0.3 + 0.9 * X(i, 1) - normal(rng);
        d(i) = latent > 0.0 ? 1.0 : 0.0;
    }
    const auto fit = probit_fit(X, d, {"const", "x"});

    // Three-stage grid sweep tightening to step 1e-4 around each winner.
    auto ll = [&](double b0, double b1) {
        Eigen::VectorXd beta(2);
        beta << b0, b1;
        return probit_loglik(X, d, beta);
    };
    double best0 = 0.0, best1 = 0.0, best = -1e300;
    auto sweep = [&](double half_width, double step) {
        const double c0 = best0, c1 = best1;
        for (double b0 = c0 - half_width; b0 <= c0 + half_width; b0 += step) {
            for (double b1 = c1 - half_width; b1 <= c1 + half_width; b1 += step) {
                const double v = ll(b0, b1);
                if (v > best) {
                    best = v;
                    best0 = b0;
                    best1 = b1;
                }
            }
        }
    };
    sweep(3.0, 0.05);
    sweep(0.06, 0.002);
    sweep(0.004, 1e-4);

    // The grid winner sits within half a step of the true argmax, so the
    // Newton solution must agree to about 1e-4 per coordinate.
    CHECK(std::abs(fit.coef(0) - best0) < 1.5e-4);
    CHECK(std::abs(fit.coef(1) - best1) < 1.5e-4);
    CHECK(*fit.loglik >= best - 1e-9);
}

TEST_CASE("probit reports perfect separation instead of diverging") {
    Eigen::MatrixXd X(8, 2);
    Eigen::VectorXd d(8);
    for (int i = 0; i < 8; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = i - 3.5;
        d(i) = i >= 4 ? 1.0 : 0.0; // d = 1 exactly when x > 0
    }
    CHECK_THROWS_AS(probit_fit(X, d, {"const", "x"}), EstimationError);
}

TEST_CASE("probit validates its inputs") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(10, 1);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(10);
    d(0) = 0.5;
    CHECK_THROWS_AS(probit_fit(X, d, {"const"}), ValidationError);

    Eigen::MatrixXd X2(10, 2);
    X2.col(0).setOnes();
    X2.col(1).setOnes(); // collinear with the intercept
    Eigen::VectorXd d2 = Eigen::VectorXd::Zero(10);
    d2.head(5).setOnes();
    CHECK_THROWS_AS(probit_fit(X2, d2, {"const", "z"}), EstimationError);
}
