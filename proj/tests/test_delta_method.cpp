#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "bargainlab/delta_method.hpp"
#include "bargainlab/errors.hpp"

using namespace bargainlab;
using namespace bargainlab::stats;

TEST_CASE("identity transform returns the square roots of the diagonal") {
    Eigen::VectorXd theta(2);
    theta << 0.4, -1.2;
    Eigen::MatrixXd cov(2, 2);
    cov << 4.0, 0.5, 0.5, 9.0;
    const auto res = delta_method([](const Eigen::VectorXd& t) { return t; }, theta, cov);
    CHECK(res.se(0) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(res.se(1) == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(res.value(0) == doctest::Approx(0.4));
}

TEST_CASE("ratio transform at (1,2) with identity covariance") {
    // g = t1/t2, gradient (1/2, -1/4), SE = sqrt(1/4 + 1/16).
    Eigen::VectorXd theta(2);
    theta << 1.0, 2.0;
    const auto res = delta_method(
        [](const Eigen::VectorXd& t) {
            Eigen::VectorXd out(1);
            out << t(0) / t(1);
            return out;
        },
        theta, Eigen::MatrixXd::Identity(2, 2));
    CHECK(res.value(0) == doctest::Approx(0.5));
    CHECK(res.se(0) == doctest::Approx(std::sqrt(0.3125)).epsilon(1e-6));
}

TEST_CASE("linear transforms reproduce the exact sandwich") {
    Eigen::MatrixXd A(2, 3);
    A << 1.0, -2.0, 0.5, 0.0, 3.0, 1.0;
    Eigen::VectorXd theta(3);
    theta << 0.1, 0.2, 0.3;
    Eigen::MatrixXd cov(3, 3);
    cov << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0;
    const auto res = delta_method([&](const Eigen::VectorXd& t) { return (A * t).eval(); },
                                  theta, cov);
    const Eigen::MatrixXd exact = A * cov * A.transpose();
    CHECK((res.cov - exact).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("non-finite transform near theta names the coordinate") {
    Eigen::VectorXd theta(2);
    theta << 1e-9, 1.0; // log goes negative-infinite just below theta(0)
    try {
        delta_method(
            [](const Eigen::VectorXd& t) {
                Eigen::VectorXd out(1);
                out << std::log(t(0));
                return out;
            },
            theta, Eigen::MatrixXd::Identity(2, 2));
        FAIL("expected an error");
    } catch (const EstimationError& e) {
        CHECK(std::string(e.what()).find("coordinate 0") != std::string::npos);
    }
}
