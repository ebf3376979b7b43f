#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "bargainlab/errors.hpp"
#include "bargainlab/local_poly.hpp"
#include "bargainlab/rng.hpp"

using namespace bargainlab;
using namespace bargainlab::stats;

TEST_CASE("degree-2 smooth reproduces a global quadratic exactly") {
    const int n = 60;
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = 1.0 + 2.0 * x(i) + 3.0 * x(i) * x(i);
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(11, 0.2, 0.8);
    const auto fit = local_poly_fit(x, y, 2, 0.25, grid);
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        REQUIRE(fit.defined[g] == 1);
        const double truth = 1.0 + 2.0 * grid(g) + 3.0 * grid(g) * grid(g);
        CHECK(fit.value(g) == doctest::Approx(truth).epsilon(1e-10));
        CHECK(fit.deriv(g) == doctest::Approx(2.0 + 6.0 * grid(g)).epsilon(1e-8));
    }
}

TEST_CASE("degree-1 smooth of the identity has unit derivative") {
    const int n = 40;
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0);
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(9, -0.6, 0.6);
    const auto fit = local_poly_fit(x, x, 1, 0.3, grid);
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        REQUIRE(fit.defined[g] == 1);
        CHECK(fit.deriv(g) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(fit.value(g) == doctest::Approx(grid(g)).epsilon(1e-10));
    }
}

TEST_CASE("noisy sine is recovered within 0.05 on the central band") {
    auto rng = make_stream(99, 0);
    std::normal_distribution<double> normal(0.0, 0.2);
    std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
    const int n = 2000;
    Eigen::VectorXd x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x(i) = unif(rng);
        y(i) = std::sin(x(i)) + normal(rng);
    }
    const double h = silverman_bandwidth(x);
    // Central 80% of the support.
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(63, 0.1 * 2.0 * M_PI, 0.9 * 2.0 * M_PI);
    const auto fit = local_poly_fit(x, y, 2, h, grid);
    double worst = 0.0;
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        REQUIRE(fit.defined[g] == 1);
        worst = std::max(worst, std::abs(fit.value(g) - std::sin(grid(g))));
    }
    CHECK(worst < 0.05);
}

TEST_CASE("windows with too few points are marked undefined") {
    Eigen::VectorXd x(7), y(7);
    x << 0.0, 0.01, 0.02, 0.03, 1.0, 1.01, 1.02;
    for (int i = 0; i < 7; ++i) y(i) = x(i);
    Eigen::VectorXd grid(3);
    grid << 0.02, 0.5, 1.0;
    const auto fit = local_poly_fit(x, y, 1, 0.05, grid);
    CHECK(fit.defined[0] == 1);
    CHECK(fit.defined[1] == 0); // the gap has no observations at all
    CHECK(std::isnan(fit.value(1)));
    CHECK(fit.defined[2] == 1);
}

TEST_CASE("input validation for bandwidth, degree and grid range") {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
    Eigen::VectorXd grid(1);
    grid << 0.5;
    CHECK_THROWS_AS(local_poly_fit(x, x, 0, 0.1, grid), ValidationError);
    CHECK_THROWS_AS(local_poly_fit(x, x, 1, 0.0, grid), ValidationError);
    Eigen::VectorXd outside(1);
    outside << 1.5;
    CHECK_THROWS_AS(local_poly_fit(x, x, 1, 0.1, outside), ValidationError);
}

TEST_CASE("silverman bandwidth follows the rule-of-thumb formula") {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(101, 0.0, 1.0);
    const double mean = x.mean();
    const double sd = std::sqrt((x.array() - mean).square().sum() / 100.0);
    const double iqr = 0.75 - 0.25; // exact for this evenly spaced grid
    const double expected = 1.06 * std::min(sd, iqr / 1.349) * std::pow(101.0, -0.2);
    CHECK(silverman_bandwidth(x) == doctest::Approx(expected).epsilon(1e-10));
}
