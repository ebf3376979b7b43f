#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "bargainlab/dataset.hpp"
#include "bargainlab/distributions.hpp"
#include "bargainlab/errors.hpp"
#include "bargainlab/mte.hpp"
#include "bargainlab/simulate.hpp"

using namespace bargainlab;

namespace {

sim::SimConfig scenario(std::uint64_t seed, int n) {
    sim::SimConfig cfg;
    cfg.truth_kind = sim::TruthKind::mte_scenario;
    cfg.n = n;
    cfg.seed = seed;
    return cfg;
}

sim::SimConfig flat_scenario(std::uint64_t seed, int n) {
    auto cfg = scenario(seed, n);
    cfg.mte_rho01 = 1.0; // U1 and U0 coincide: no essential heterogeneity
    cfg.mte_rho0 = 0.3;
    cfg.mte_rho1 = 0.3;
    return cfg;
}

const mte::PropensitySpec kFirstStage{{"x_dem"}, "instrument"};
const mte::MteSpec kOutcome{"y_out", {"x_dem"}};

double max_dev_vs_truth(const mte::MteCurve& c, const sim::MteTruth& truth, double xbar,
                        double u_lo, double u_hi) {
    double dev = 0.0;
    for (Eigen::Index g = 0; g < c.u_grid.size(); ++g) {
        const double u = c.u_grid(g);
        if (!c.defined[static_cast<std::size_t>(g)] || u < u_lo || u > u_hi) continue;
        dev = std::max(dev, std::abs(c.mte(g) - truth.mte_at(u, xbar)));
    }
    return dev;
}

} // namespace

TEST_CASE("method names round-trip") {
    CHECK(mte::to_string(mte::MteMethod::parametric_deg1) == "parametric_deg1");
    CHECK(mte::mte_method_from_string("semiparametric_deg2") ==
          mte::MteMethod::semiparametric_deg2);
    CHECK_THROWS_AS(mte::mte_method_from_string("cubic"), ValidationError);
}

TEST_CASE("flat truth gives a constant curve within two standard errors") {
    sim::MteTruth truth;
    const Dataset d = sim::generate_mte_scenario(flat_scenario(11, 20000), &truth);
    const double ate = (truth.y1 - truth.y0).mean();
    const auto fit = mte::estimate_propensity(d, kFirstStage);
    const auto c = mte::mte_separate(d, fit, kOutcome, mte::MteMethod::parametric_deg1);

    int checked = 0;
    for (Eigen::Index g = 0; g < c.u_grid.size(); ++g) {
        if (!c.defined[static_cast<std::size_t>(g)]) continue;
        REQUIRE(std::isfinite(c.se(g)));
        CHECK(std::abs(c.mte(g) - ate) <= 2.0 * c.se(g));
        ++checked;
    }
    CHECK(checked > 50);
}

TEST_CASE("flat truth stays near the average effect semiparametrically") {
    sim::MteTruth truth;
    const Dataset d = sim::generate_mte_scenario(flat_scenario(11, 20000), &truth);
    const double ate = (truth.y1 - truth.y0).mean();
    const auto fit = mte::estimate_propensity(d, kFirstStage);
    const auto c =
        mte::mte_separate(d, fit, kOutcome, mte::MteMethod::semiparametric_deg2);
    double dev = 0.0;
    for (Eigen::Index g = 0; g < c.u_grid.size(); ++g) {
        const double u = c.u_grid(g);
        if (!c.defined[static_cast<std::size_t>(g)] || u < 0.2 || u > 0.8) continue;
        dev = std::max(dev, std::abs(c.mte(g) - ate));
    }
    CHECK(dev < 0.25);
}

TEST_CASE("parametric curve tracks the closed-form selection truth") {
    sim::MteTruth truth;
    const Dataset d = sim::generate_mte_scenario(scenario(21, 50000), &truth);
    REQUIRE(truth.slope == doctest::Approx(0.5));
    const double xbar = d.column("x_dem").mean();
    const auto fit = mte::estimate_propensity(d, kFirstStage);
    const auto c = mte::mte_separate(d, fit, kOutcome, mte::MteMethod::parametric_deg1);

    CHECK(max_dev_vs_truth(c, truth, xbar, 0.2, 0.8) < 0.1);

    // Slope of the estimated curve against the inverse-normal quantile.
    double sxx = 0.0, sxy = 0.0, sx = 0.0, sy = 0.0;
    int m = 0;
    for (Eigen::Index g = 0; g < c.u_grid.size(); ++g) {
        if (!c.defined[static_cast<std::size_t>(g)]) continue;
        const double q = stats::norm_quantile(c.u_grid(g));
        sx += q;
        sy += c.mte(g);
        sxx += q * q;
        sxy += q * c.mte(g);
        ++m;
    }
    const double slope = (sxy - sx * sy / m) / (sxx - sx * sx / m);
    CHECK(slope == doctest::Approx(0.5).epsilon(0.2));
    CHECK(std::abs(slope - 0.5) < 0.1);
}

TEST_CASE("semiparametric curve tracks the truth on the interior") {
    sim::MteTruth truth;
    const Dataset d = sim::generate_mte_scenario(scenario(22, 50000), &truth);
    const double xbar = d.column("x_dem").mean();
    const auto fit = mte::estimate_propensity(d, kFirstStage);
    const auto c =
        mte::mte_separate(d, fit, kOutcome, mte::MteMethod::semiparametric_deg2);
    CHECK(max_dev_vs_truth(c, truth, xbar, 0.2, 0.8) < 0.2);
}

TEST_CASE("parametric curve equals its stored polynomial exactly") {
    const Dataset d = sim::generate_mte_scenario(scenario(5, 3000));
    const auto fit = mte::estimate_propensity(d, kFirstStage);
    const auto c = mte::mte_separate(d, fit, kOutcome, mte::MteMethod::parametric_deg1);
    REQUIRE(c.unobs_coef.size() == 1);
    for (Eigen::Index g = 0; g < c.u_grid.size(); ++g) {
        if (!c.defined[static_cast<std::size_t>(g)]) continue;
        const double rebuilt =
            c.xbar_level + c.unobs_const + c.unobs_coef(0) * c.u_grid(g);
        CHECK(c.mte(g) == doctest::Approx(rebuilt).epsilon(1e-10));
    }
}

TEST_CASE("curve is invariant to affine rescaling of the instrument") {
    const Dataset d = sim::generate_mte_scenario(scenario(42, 5000));
    std::vector<HouseholdRecord> recs = d.records();
    for (auto& r : recs) r.instrument = 0.5 * r.instrument + 0.25;
    const Dataset d2 = d.with_records(recs);

    const auto fit = mte::estimate_propensity(d, kFirstStage);
    const auto fit2 = mte::estimate_propensity(d2, kFirstStage);
    CHECK((fit.scores - fit2.scores).lpNorm<Eigen::Infinity>() < 1e-8);

    for (auto method :
         {mte::MteMethod::parametric_deg1, mte::MteMethod::semiparametric_deg2}) {
        const auto c = mte::mte_separate(d, fit, kOutcome, method);
        const auto c2 = mte::mte_separate(d2, fit2, kOutcome, method);
        CHECK(std::abs(c.support_lo - c2.support_lo) < 1e-8);
        CHECK(std::abs(c.support_hi - c2.support_hi) < 1e-8);
        for (Eigen::Index g = 0; g < c.u_grid.size(); ++g) {
            if (!c.defined[static_cast<std::size_t>(g)]) continue;
            CHECK(std::abs(c.mte(g) - c2.mte(g)) < 1e-8);
        }
    }
}

TEST_CASE("curve average matches the average effect when support is wide") {
    sim::MteTruth truth;
    const Dataset d = sim::generate_mte_scenario(scenario(21, 50000), &truth);
    const double xbar = d.column("x_dem").mean();
    const auto fit = mte::estimate_propensity(d, kFirstStage);
    const auto c = mte::mte_separate(d, fit, kOutcome, mte::MteMethod::parametric_deg1);
    CHECK(c.support_lo < 0.05);
    CHECK(c.support_hi > 0.95);
    double avg = 0.0;
    int m = 0;
    for (Eigen::Index g = 0; g < c.u_grid.size(); ++g) {
        if (!c.defined[static_cast<std::size_t>(g)]) continue;
        avg += c.mte(g);
        ++m;
    }
    avg /= m;
    const double ate = truth.ate + (truth.beta1 - truth.beta0) * xbar;
    CHECK(std::abs(avg - ate) < 0.05);
}

TEST_CASE("grid points outside the support carry the undefined marker") {
    const Dataset d = sim::generate_mte_scenario(scenario(5, 3000));
    const auto fit = mte::estimate_propensity(d, kFirstStage);
    Eigen::VectorXd grid(3);
    grid << 0.001, 0.5, 0.999;
    const auto c =
        mte::mte_separate(d, fit, kOutcome, mte::MteMethod::parametric_deg1, grid);
    CHECK(c.defined[0] == 0);
    CHECK(std::isnan(c.mte(0)));
    CHECK(c.defined[1] == 1);
    CHECK(c.defined[2] == 0);
}

TEST_CASE("bootstrap bands are deterministic in the seed") {
    const Dataset d = sim::generate_mte_scenario(scenario(7, 2000));
    const auto a = mte::mte_bootstrap(d, kFirstStage, kOutcome,
                                      mte::MteMethod::parametric_deg1, 25, 99);
    const auto b = mte::mte_bootstrap(d, kFirstStage, kOutcome,
                                      mte::MteMethod::parametric_deg1, 25, 99);
    for (Eigen::Index g = 0; g < a.u_grid.size(); ++g) {
        if (!a.defined[static_cast<std::size_t>(g)]) continue;
        REQUIRE(std::isfinite(a.band_lo(g)) == std::isfinite(b.band_lo(g)));
        if (!std::isfinite(a.band_lo(g))) continue;
        CHECK(a.se(g) == b.se(g));
        CHECK(a.band_lo(g) == b.band_lo(g));
        CHECK(a.band_hi(g) == b.band_hi(g));
    }
}

TEST_CASE("two replications are the legal minimum") {
    const Dataset d = sim::generate_mte_scenario(scenario(7, 2000));
    CHECK_THROWS_AS(mte::mte_bootstrap(d, kFirstStage, kOutcome,
                                       mte::MteMethod::parametric_deg1, 1, 99),
                    ValidationError);
    const auto c = mte::mte_bootstrap(d, kFirstStage, kOutcome,
                                      mte::MteMethod::parametric_deg1, 2, 99);
    CHECK(c.band_lo.size() == c.u_grid.size());
    CHECK(c.band_hi.size() == c.u_grid.size());
}

TEST_CASE("bootstrap bands cover a flat truth on most of the grid") {
    sim::MteTruth truth;
    const Dataset d = sim::generate_mte_scenario(flat_scenario(7, 2000), &truth);
    const double ate = (truth.y1 - truth.y0).mean();
    const auto c = mte::mte_bootstrap(d, kFirstStage, kOutcome,
                                      mte::MteMethod::parametric_deg1, 250, 17);
    int covered = 0, total = 0;
    for (Eigen::Index g = 0; g < c.u_grid.size(); ++g) {
        if (!c.defined[static_cast<std::size_t>(g)] || !std::isfinite(c.band_lo(g))) {
            continue;
        }
        ++total;
        if (c.band_lo(g) <= ate && ate <= c.band_hi(g)) ++covered;
    }
    REQUIRE(total > 50);
    CHECK(covered >= (9 * total + 9) / 10);
}

TEST_CASE("unobservable test holds its size under the double null") {
    // Flat unobservables and equal covariate loadings: both nulls true.
    int rej_u = 0, rej_o = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        auto cfg = flat_scenario(1000 + r, 5000);
        cfg.mte_beta1 = 0.3;
        const Dataset d = sim::generate_mte_scenario(cfg);
        const auto fit = mte::estimate_propensity(d, kFirstStage);
        const auto c =
            mte::mte_separate(d, fit, kOutcome, mte::MteMethod::parametric_deg1);
        const auto t = mte::heterogeneity_tests(c);
        if (t.p_unobservable < 0.05) ++rej_u;
        if (t.p_observable < 0.05) ++rej_o;
    }
    CHECK(rej_u >= 6);  // 3% of 200
    CHECK(rej_u <= 14); // 7% of 200
    CHECK(rej_o >= 3);
    CHECK(rej_o <= 20);
}

TEST_CASE("unobservable test detects essential heterogeneity") {
    int rej = 0;
    for (int r = 0; r < 50; ++r) {
        auto cfg = scenario(3000 + r, 10000);
        cfg.mte_rho1 = 0.15;
        cfg.mte_rho0 = -0.15;
        const Dataset d = sim::generate_mte_scenario(cfg);
        const auto fit = mte::estimate_propensity(d, kFirstStage);
        const auto c =
            mte::mte_separate(d, fit, kOutcome, mte::MteMethod::parametric_deg1);
        if (mte::heterogeneity_tests(c).p_unobservable < 0.01) ++rej;
    }
    CHECK(rej >= 48);
}

TEST_CASE("observable test detects a covariate loading gap") {
    int rej = 0;
    for (int r = 0; r < 20; ++r) {
        const Dataset d = sim::generate_mte_scenario(scenario(5000 + r, 2000));
        const auto fit = mte::estimate_propensity(d, kFirstStage);
        const auto c =
            mte::mte_separate(d, fit, kOutcome, mte::MteMethod::parametric_deg1);
        if (mte::heterogeneity_tests(c).p_observable < 0.05) ++rej;
    }
    CHECK(rej >= 19);
}

TEST_CASE("singular test variance is an estimation error") {
    mte::MteCurve c;
    c.observed_diff.names = {"x_dem"};
    c.observed_diff.coef = Eigen::VectorXd::Constant(1, 0.1);
    c.observed_diff.cov = Eigen::MatrixXd::Zero(1, 1);
    c.unobs_coef = Eigen::VectorXd::Constant(1, 0.2);
    c.unobs_cov = Eigen::MatrixXd::Zero(1, 1);
    CHECK_THROWS_AS(mte::heterogeneity_tests(c), EstimationError);
}

TEST_CASE("scenario ledger records the implied selection slope") {
    sim::MteTruth truth;
    const Dataset d = sim::generate_mte_scenario(scenario(9, 500), &truth);
    CHECK(truth.slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(truth.ate == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(truth.mte_at(0.5) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(truth.mte_at(0.2) + truth.mte_at(0.8) == doctest::Approx(0.8).epsilon(1e-10));
    for (Eigen::Index i = 0; i < truth.u_d.size(); ++i) {
        CHECK(truth.u_d(i) > 0.0);
        CHECK(truth.u_d(i) < 1.0);
    }
    CHECK(d.size() == 500);
}

TEST_CASE("degenerate unobservable correlation makes the gain deterministic") {
    sim::MteTruth truth;
    const Dataset d = sim::generate_mte_scenario(flat_scenario(13, 800), &truth);
    const Eigen::VectorXd x = d.column("x_dem");
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double gain = truth.y1(i) - truth.y0(i);
        CHECK(gain == doctest::Approx(0.4 + 0.3 * x(i)).epsilon(1e-10));
    }
}

TEST_CASE("an indefinite correlation triple is refused") {
    auto cfg = scenario(1, 100);
    cfg.mte_rho01 = 0.9;
    cfg.mte_rho0 = -0.25;
    cfg.mte_rho1 = 0.25;
    CHECK_THROWS_AS(sim::generate_mte_scenario(cfg), ValidationError);
}

TEST_CASE("scenario generation is deterministic in the seed") {
    const Dataset a = sim::generate_mte_scenario(scenario(33, 400));
    const Dataset b = sim::generate_mte_scenario(scenario(33, 400));
    const Eigen::VectorXd ya = a.column("y_out"), yb = b.column("y_out");
    const Eigen::VectorXd za = a.column("instrument"), zb = b.column("instrument");
    for (Eigen::Index i = 0; i < ya.size(); ++i) {
        CHECK(ya(i) == yb(i));
        CHECK(za(i) == zb(i));
    }
}

TEST_CASE("take-up frequency matches the latent index probabilities") {
    const Dataset d = sim::generate_mte_scenario(scenario(77, 100000));
    const Eigen::VectorXd z = d.column("instrument");
    const Eigen::VectorXd x = d.column("x_dem");
    double expect = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        expect += stats::norm_cdf(-1.0 + 2.0 * z(i) + 0.3 * x(i));
    }
    expect /= static_cast<double>(z.size());
    const double share = d.column("treated").mean();
    CHECK(std::abs(share - expect) < 0.01);
}
