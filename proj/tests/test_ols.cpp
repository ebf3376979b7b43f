#include <doctest.h>

#include <Eigen/Dense>

#include "bargainlab/errors.hpp"
#include "bargainlab/ols.hpp"

using namespace bargainlab;
using namespace bargainlab::stats;

TEST_CASE("ols reproduces an exact linear relationship") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 0, 1, 1, 1, 2, 1, 3;
    Eigen::VectorXd y(4);
    y << 0, 2, 4, 6; // y = 2x
    const auto fit = ols_fit(X, y, {"const", "x"});
    CHECK(fit.coef(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit.coef(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ols_residuals(X, y, fit).norm() == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("ols on the three-point normal-equations fixture") {
    // x=(0,1,2), y=(1,3,4): X'X = [[3,3],[3,5]], X'y = (8,11),
    // so intercept = 7/6 and slope = 3/2. The residual sum of squares is
    // 1/6, giving Var(slope) = (1/6)(3/6) = 1/12.
    Eigen::MatrixXd X(3, 2);
    X << 1, 0, 1, 1, 1, 2;
    Eigen::VectorXd y(3);
    y << 1, 3, 4;
    const auto fit = ols_fit(X, y, {"const", "x"});
    CHECK(fit.coef(0) == doctest::Approx(7.0 / 6.0).epsilon(1e-12));
    CHECK(fit.coef(1) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(fit.cov(1, 1) == doctest::Approx(1.0 / 12.0).epsilon(1e-10));
    CHECK(fit.cov(0, 0) == doctest::Approx(5.0 / 36.0).epsilon(1e-10));
    CHECK(fit.n == 3);
    CHECK(fit.coef_of("x") == doctest::Approx(1.5));
}

TEST_CASE("ols names the collinear column in the singular-design error") {
    Eigen::MatrixXd X(5, 3);
    for (int i = 0; i < 5; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = i;
        X(i, 2) = 2.0 * i; // duplicate of column 1 up to scale
    }
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, 0, 4);
    try {
        ols_fit(X, y, {"const", "x", "x_times_two"});
        FAIL("expected a singular-design error");
    } catch (const EstimationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("collinear") != std::string::npos);
        CHECK(msg.find("x") != std::string::npos);
    }
}

TEST_CASE("ols rejects designs with too few rows") {
    Eigen::MatrixXd X(2, 2);
    X << 1, 0, 1, 1;
    Eigen::VectorXd y(2);
    y << 1, 2;
    CHECK_THROWS_AS(ols_fit(X, y, {"const", "x"}), ValidationError);
}

TEST_CASE("ols covariance is exactly symmetric") {
    Eigen::MatrixXd X(20, 3);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = 0.1 * i;
        X(i, 2) = (i % 3) - 1.0;
        y(i) = 0.5 + 0.3 * X(i, 1) - 0.2 * X(i, 2) + 0.01 * ((i * 7) % 5 - 2);
    }
    const auto fit = ols_fit(X, y, {"const", "a", "b"});
    CHECK((fit.cov - fit.cov.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
}
