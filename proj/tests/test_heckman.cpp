#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "bargainlab/heckman.hpp"
#include "bargainlab/rng.hpp"

using namespace bargainlab;
using namespace bargainlab::stats;

namespace {

struct SelectionDraw {
    Eigen::MatrixXd Xp; // const, x, w (exclusion)
    Eigen::MatrixXd Xo; // const, x
    Eigen::VectorXd part, y;
};

// Participation: 1{0.3 + 0.5 x + 0.8 w + v > 0}; outcome y = 1 + 2 x + e
// with corr(e, v) = rho and unit variances.
SelectionDraw draw_selection_data(int n, double rho, std::uint64_t seed) {
    auto rng = make_stream(seed, 17);
    std::normal_distribution<double> normal;
    SelectionDraw d;
    d.Xp.resize(n, 3);
    d.Xo.resize(n, 2);
    d.part.resize(n);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = normal(rng);
        const double w = normal(rng);
        const double v = normal(rng);
        const double e = rho * v + std::sqrt(1.0 - rho * rho) * normal(rng);
        d.Xp.row(i) << 1.0, x, w;
        d.Xo.row(i) << 1.0, x;
        d.part(i) = (0.3 + 0.5 * x + 0.8 * w + v > 0.0) ? 1.0 : 0.0;
        d.y(i) = 1.0 + 2.0 * x + e;
    }
    return d;
}

} // namespace

TEST_CASE("with independent errors the Mills term is insignificant") {
    int significant = 0;
    for (int seed = 0; seed < 100; ++seed) {
        const auto d = draw_selection_data(600, 0.0, 1000 + seed);
        const auto fit = heckman_two_step(d.Xp, {"const", "x", "w"}, d.part, d.Xo,
                                          {"const", "x"}, d.y);
        const double t = fit.imr_coef / fit.outcome.se_of("imr");
        if (std::abs(t) >= 2.0) ++significant;
    }
    // Nominal size is about 5%; allow binomial slack over 100 seeds.
    CHECK(significant <= 12);
}

TEST_CASE("error correlation of one half is recovered on a large sample") {
    const auto d = draw_selection_data(10000, 0.5, 5);
    const auto fit = heckman_two_step(d.Xp, {"const", "x", "w"}, d.part, d.Xo,
                                      {"const", "x"}, d.y);
    CHECK(fit.rho > 0.4);
    CHECK(fit.rho < 0.6);
    CHECK(fit.outcome.coef_of("x") == doctest::Approx(2.0).epsilon(0.05));
    CHECK(fit.outcome.coef_of("const") == doctest::Approx(1.0).epsilon(0.10));
    CHECK(fit.sigma == doctest::Approx(1.0).epsilon(0.10));
    CHECK(fit.exclusion_ok);
}

TEST_CASE("missing exclusion restriction raises the warning flag") {
    const auto d = draw_selection_data(2000, 0.3, 11);
    // Outcome uses the same columns as participation: nothing excluded.
    const auto fit = heckman_two_step(d.Xp, {"const", "x", "w"}, d.part, d.Xp,
                                      {"const", "x", "w"}, d.y);
    CHECK(!fit.exclusion_ok);
    REQUIRE(!fit.outcome.warnings.empty());
    CHECK(fit.outcome.warnings.front().find("exclusion") != std::string::npos);
}

TEST_CASE("participation probit failure propagates") {
    const int n = 20;
    Eigen::MatrixXd Xp(n, 2), Xo(n, 1);
    Eigen::VectorXd part(n), y(n);
    for (int i = 0; i < n; ++i) {
        Xp(i, 0) = 1.0;
        Xp(i, 1) = i;
        Xo(i, 0) = 1.0;
        part(i) = i >= 10 ? 1.0 : 0.0; // perfectly separated in the index
        y(i) = i;
    }
    CHECK_THROWS(heckman_two_step(Xp, {"const", "x"}, part, Xo, {"const"}, y));
}
