#include "bargainlab/mte.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "bargainlab/bootstrap.hpp"
#include "bargainlab/distributions.hpp"
#include "bargainlab/errors.hpp"
#include "bargainlab/local_poly.hpp"
#include "bargainlab/ols.hpp"
#include "bargainlab/rng.hpp"

namespace bargainlab::mte {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd default_grid(const CommonSupport& cs) {
    const int k_lo = static_cast<int>(std::ceil(cs.lo * 100.0 - 1e-9));
    const int k_hi = static_cast<int>(std::floor(cs.hi * 100.0 + 1e-9));
    if (k_hi < k_lo) {
        Eigen::VectorXd g(1);
        g(0) = 0.5 * (cs.lo + cs.hi);
        return g;
    }
    Eigen::VectorXd g(k_hi - k_lo + 1);
    for (int k = k_lo; k <= k_hi; ++k) g(k - k_lo) = k / 100.0;
    return g;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
    return out;
}

Eigen::VectorXd outcome_vector(const Dataset& d, const std::string& name,
                               const std::vector<Eigen::Index>& rows) {
    const Eigen::VectorXd full = d.column(name);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double v = full(rows[i]);
        if (!std::isfinite(v)) {
            throw ValidationError("mte_separate: outcome '" + name + "' missing for record " +
                                  d.records()[static_cast<std::size_t>(rows[i])].id);
        }
        y(static_cast<Eigen::Index>(i)) = v;
    }
    return y;
}

// Per-arm outcome regression y on [1, X, p, ..., p^deg].
stats::FitResult arm_parametric(const Dataset& d, const MteSpec& spec,
                                const PropensityFit& pf,
                                const std::vector<Eigen::Index>& rows, int deg) {
    std::vector<std::string> names;
    const Eigen::MatrixXd X = design_matrix(d, spec.covariates, rows, true, &names);
    Eigen::MatrixXd full(X.rows(), X.cols() + deg);
    full.leftCols(X.cols()) = X;
    const Eigen::VectorXd p = gather(pf.scores, rows);
    for (int m = 1; m <= deg; ++m) {
        full.col(X.cols() + m - 1) = p.array().pow(m);
        names.push_back("p" + std::to_string(m));
    }
    const Eigen::VectorXd y = outcome_vector(d, spec.outcome, rows);
    return stats::ols_fit(full, y, names);
}

// Coefficients a_0..a_deg of the u-polynomial d/du[u K1] + d/du[(1-u) K0],
// with K_j(p) = sum_m c_j(m-1) p^m.
Eigen::VectorXd mte_poly(const Eigen::VectorXd& c1, const Eigen::VectorXd& c0) {
    const Eigen::Index deg = c1.size();
    Eigen::VectorXd a = Eigen::VectorXd::Zero(deg + 1);
    for (Eigen::Index m = 1; m <= deg; ++m) a(m) += (m + 1) * c1(m - 1);
    for (Eigen::Index j = 0; j < deg; ++j) a(j) += (j + 1) * c0(j);
    for (Eigen::Index j = 1; j <= deg; ++j) a(j) -= (j + 1) * c0(j - 1);
    return a;
}

// u-varying coefficients (a_1..a_deg) as a linear map of (c1, c0), with
// block-diagonal covariance across the disjoint arm samples.
void unobs_block(const stats::FitResult& f1, const stats::FitResult& f0, int deg, int k,
                 Eigen::VectorXd* coef, Eigen::MatrixXd* cov) {
    const Eigen::VectorXd c1 = f1.coef.tail(deg);
    const Eigen::VectorXd c0 = f0.coef.tail(deg);
    *coef = mte_poly(c1, c0).tail(deg);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(deg, 2 * deg);
    for (int j = 1; j <= deg; ++j) {
        J(j - 1, j - 1) = j + 1.0;
        J(j - 1, deg + j - 1) -= j + 1.0;
        if (j + 1 <= deg) J(j - 1, deg + j) += j + 1.0;
    }
    Eigen::MatrixXd Vc = Eigen::MatrixXd::Zero(2 * deg, 2 * deg);
    Vc.topLeftCorner(deg, deg) = f1.cov.block(k, k, deg, deg);
    Vc.bottomRightCorner(deg, deg) = f0.cov.block(k, k, deg, deg);
    *cov = stats::symmetrize(J * Vc * J.transpose());
}

// local_poly_fit demands grid points inside the data range; mask the rest
// as undefined instead of failing the whole curve.
stats::SmoothFit smooth_on_grid(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                int degree, double h, const Eigen::VectorXd& grid) {
    const double lo = x.minCoeff();
    const double hi = x.maxCoeff();
    Eigen::Index first = 0;
    while (first < grid.size() && grid(first) < lo) ++first;
    Eigen::Index last = grid.size() - 1;
    while (last >= first && grid(last) > hi) --last;

    stats::SmoothFit out;
    out.grid = grid;
    out.value = Eigen::VectorXd::Constant(grid.size(), kNan);
    out.deriv = Eigen::VectorXd::Constant(grid.size(), kNan);
    out.defined.assign(static_cast<std::size_t>(grid.size()), 0);
    out.bandwidth = h;
    out.degree = degree;
    if (last < first) return out;

    const stats::SmoothFit inner =
        stats::local_poly_fit(x, y, degree, h, grid.segment(first, last - first + 1));
    for (Eigen::Index g = first; g <= last; ++g) {
        out.value(g) = inner.value(g - first);
        out.deriv(g) = inner.deriv(g - first);
        out.defined[static_cast<std::size_t>(g)] = inner.defined[static_cast<std::size_t>(g - first)];
    }
    return out;
}

// Linear interpolation of a uniform-grid smooth at the data points; ok is
// cleared where a bracketing grid value is undefined.
Eigen::VectorXd interp_at(const stats::SmoothFit& sf, const Eigen::VectorXd& x,
                          std::vector<std::uint8_t>* ok) {
    const Eigen::Index G = sf.grid.size();
    const double lo = sf.grid(0);
    const double step = G > 1 ? sf.grid(1) - sf.grid(0) : 1.0;
    Eigen::VectorXd out(x.size());
    ok->assign(static_cast<std::size_t>(x.size()), 0);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::Index j = G > 1 ? static_cast<Eigen::Index>((x(i) - lo) / step) : 0;
        j = std::clamp<Eigen::Index>(j, 0, G - 2 >= 0 ? G - 2 : 0);
        const Eigen::Index j1 = std::min<Eigen::Index>(j + 1, G - 1);
        if (!sf.defined[static_cast<std::size_t>(j)] ||
            !sf.defined[static_cast<std::size_t>(j1)]) {
            out(i) = kNan;
            continue;
        }
        const double t = j1 > j ? (x(i) - sf.grid(j)) / step : 0.0;
        out(i) = (1.0 - t) * sf.value(j) + t * sf.value(j1);
        (*ok)[static_cast<std::size_t>(i)] = 1;
    }
    return out;
}

struct RobinsonArm {
    Eigen::VectorXd beta;   // covariate slopes (empty when no covariates)
    Eigen::MatrixXd cov;
    stats::SmoothFit m;     // E[y - X beta | p] with derivative, on the u grid
    int n = 0;
};

// Bandwidth for the m-step smooths. Their first derivatives feed the
// MTE, and the value-optimal n^(-1/5) Silverman rate undersmooths a
// derivative badly, so use a robust spread at the derivative-optimal
// n^(-1/7) rate. The constant is calibrated against the closed-form
// normal-selection oracle, where deviations flatten for h near 0.25
// at arm sizes in the tens of thousands.
double deriv_bandwidth(const Eigen::VectorXd& p) {
    std::vector<double> v(p.data(), p.data() + p.size());
    const double iqr = stats::percentile(v, 0.75) - stats::percentile(v, 0.25);
    const double sd = std::sqrt((p.array() - p.mean()).square().sum() /
                                std::max<double>(1.0, static_cast<double>(p.size() - 1)));
    const double s = std::min(sd, iqr / 1.349);
    return 5.0 * s * std::pow(static_cast<double>(p.size()), -1.0 / 7.0);
}

RobinsonArm robinson_arm(const Dataset& d, const MteSpec& spec, const PropensityFit& pf,
                         const std::vector<Eigen::Index>& rows,
                         const Eigen::VectorXd& u_grid) {
    RobinsonArm arm;
    arm.n = static_cast<int>(rows.size());
    const Eigen::VectorXd p = gather(pf.scores, rows);
    const Eigen::VectorXd y = outcome_vector(d, spec.outcome, rows);
    const Eigen::MatrixXd X = design_matrix(d, spec.covariates, rows, false);
    // The partialling step estimates conditional means, where the
    // value-optimal rate is right; a user bandwidth overrides only the
    // m-step below.
    const double h = stats::silverman_bandwidth(p);

    const Eigen::Index ncov = X.cols();
    if (ncov > 0) {
        // Double-residual step: partial y and each covariate on the score
        // via a fine interpolation grid, then slope-only OLS.
        const int kFine = 201;
        Eigen::VectorXd fine(kFine);
        const double lo = p.minCoeff();
        const double hi = p.maxCoeff();
        for (int g = 0; g < kFine; ++g) fine(g) = lo + (hi - lo) * g / (kFine - 1.0);

        std::vector<std::uint8_t> keep(rows.size(), 1);
        std::vector<std::uint8_t> ok;
        const stats::SmoothFit sy = smooth_on_grid(p, y, 1, h, fine);
        const Eigen::VectorXd yhat = interp_at(sy, p, &ok);
        for (std::size_t i = 0; i < keep.size(); ++i) keep[i] &= ok[i];
        Eigen::MatrixXd Xhat(X.rows(), ncov);
        for (Eigen::Index c = 0; c < ncov; ++c) {
            const stats::SmoothFit sx = smooth_on_grid(p, X.col(c), 1, h, fine);
            Xhat.col(c) = interp_at(sx, p, &ok);
            for (std::size_t i = 0; i < keep.size(); ++i) keep[i] &= ok[i];
        }
        std::vector<Eigen::Index> kept;
        for (std::size_t i = 0; i < keep.size(); ++i) {
            if (keep[i]) kept.push_back(static_cast<Eigen::Index>(i));
        }
        if (static_cast<Eigen::Index>(kept.size()) <= ncov) {
            throw EstimationError("mte_separate: too few observations survive the "
                                  "partialling step");
        }
        Eigen::MatrixXd Xt(static_cast<Eigen::Index>(kept.size()), ncov);
        Eigen::VectorXd yt(static_cast<Eigen::Index>(kept.size()));
        for (std::size_t i = 0; i < kept.size(); ++i) {
            Xt.row(static_cast<Eigen::Index>(i)) = X.row(kept[i]) - Xhat.row(kept[i]);
            yt(static_cast<Eigen::Index>(i)) = y(kept[i]) - yhat(kept[i]);
        }
        const stats::FitResult f = stats::ols_fit(Xt, yt, spec.covariates);
        arm.beta = f.coef;
        arm.cov = f.cov;
    } else {
        arm.beta.resize(0);
        arm.cov.resize(0, 0);
    }

    const Eigen::VectorXd partial = ncov > 0 ? Eigen::VectorXd(y - X * arm.beta) : y;
    const double hm = spec.bandwidth > 0.0 ? spec.bandwidth : deriv_bandwidth(p);
    arm.m = smooth_on_grid(p, partial, 2, hm, u_grid);
    return arm;
}

double wald(const Eigen::VectorXd& theta, const Eigen::MatrixXd& V, double* stat) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
    if (!lu.isInvertible()) {
        throw EstimationError("heterogeneity_tests: singular Wald variance");
    }
    *stat = theta.dot(lu.solve(theta));
    return stats::chi2_sf(*stat, static_cast<int>(theta.size()));
}

} // namespace

std::string to_string(MteMethod m) {
    return m == MteMethod::parametric_deg1 ? "parametric_deg1" : "semiparametric_deg2";
}

MteMethod mte_method_from_string(const std::string& s) {
    if (s == "parametric_deg1") return MteMethod::parametric_deg1;
    if (s == "semiparametric_deg2") return MteMethod::semiparametric_deg2;
    throw ValidationError("unknown MTE method '" + s + "'");
}

MteCurve mte_separate(const Dataset& d, const PropensityFit& fit, const MteSpec& spec,
                      MteMethod method, const Eigen::VectorXd& u_grid) {
    if (fit.scores.size() != static_cast<Eigen::Index>(d.size())) {
        throw ValidationError("mte_separate: propensity fit does not match dataset");
    }
    if (spec.outcome.empty()) {
        throw ValidationError("mte_separate: no outcome column selected");
    }
    const Eigen::VectorXd treated = d.column("treated");
    const CommonSupport cs = common_support(fit, treated);

    std::vector<Eigen::Index> rows1;
    std::vector<Eigen::Index> rows0;
    std::vector<Eigen::Index> pool;
    for (Eigen::Index i = 0; i < fit.scores.size(); ++i) {
        const double p = fit.scores(i);
        if (p < cs.lo || p > cs.hi) continue;
        pool.push_back(i);
        (treated(i) > 0.5 ? rows1 : rows0).push_back(i);
    }

    MteCurve curve;
    curve.method = method;
    curve.support_lo = cs.lo;
    curve.support_hi = cs.hi;
    curve.share_in_support = cs.share_retained;
    curve.u_grid = u_grid.size() > 0 ? u_grid : default_grid(cs);
    for (Eigen::Index g = 1; g < curve.u_grid.size(); ++g) {
        if (curve.u_grid(g) <= curve.u_grid(g - 1)) {
            throw ValidationError("mte_separate: u grid must be strictly increasing");
        }
    }
    const Eigen::Index G = curve.u_grid.size();
    curve.mte = Eigen::VectorXd::Constant(G, kNan);
    curve.se = Eigen::VectorXd::Constant(G, kNan);
    curve.band_lo = Eigen::VectorXd::Constant(G, kNan);
    curve.band_hi = Eigen::VectorXd::Constant(G, kNan);
    curve.defined.assign(static_cast<std::size_t>(G), 0);

    const int ncov = static_cast<int>(spec.covariates.size());
    const int k = ncov + 1; // intercept block

    // Pooled covariate means for the display point.
    const Eigen::MatrixXd Xpool = design_matrix(d, spec.covariates, pool, true);
    const Eigen::VectorXd xbar = Xpool.colwise().mean();

    if (method == MteMethod::parametric_deg1) {
        const int deg = 1;
        const stats::FitResult f1 = arm_parametric(d, spec, fit, rows1, deg);
        const stats::FitResult f0 = arm_parametric(d, spec, fit, rows0, deg);
        const Eigen::VectorXd diff = f1.coef.head(k) - f0.coef.head(k);
        curve.xbar_level = xbar.dot(diff);
        const Eigen::VectorXd a = mte_poly(f1.coef.tail(deg), f0.coef.tail(deg));
        curve.unobs_const = a(0);
        unobs_block(f1, f0, deg, k, &curve.unobs_coef, &curve.unobs_cov);

        curve.observed_diff.names = spec.covariates;
        curve.observed_diff.coef = diff.tail(ncov);
        curve.observed_diff.cov =
            f1.cov.block(1, 1, ncov, ncov) + f0.cov.block(1, 1, ncov, ncov);
        curve.observed_diff.n = static_cast<int>(pool.size());

        for (Eigen::Index g = 0; g < G; ++g) {
            const double u = curve.u_grid(g);
            if (u < cs.lo || u > cs.hi) continue;
            double value = curve.xbar_level + a(0);
            double up = u;
            for (int j = 1; j <= deg; ++j, up *= u) value += a(j) * up;
            // Delta weights over each arm's full coefficient vector.
            Eigen::VectorXd w1 = Eigen::VectorXd::Zero(k + deg);
            Eigen::VectorXd w0 = Eigen::VectorXd::Zero(k + deg);
            w1.head(k) = xbar;
            w0.head(k) = -xbar;
            double um = 1.0;
            for (int m = 1; m <= deg; ++m) {
                w1(k + m - 1) = (m + 1) * um * u;
                w0(k + m - 1) = m * um - (m + 1) * um * u;
                um *= u;
            }
            curve.mte(g) = value;
            curve.se(g) = std::sqrt(w1.dot(f1.cov * w1) + w0.dot(f0.cov * w0));
            curve.defined[static_cast<std::size_t>(g)] = 1;
        }
        return curve;
    }

    // Semiparametric: Robinson slopes plus local-quadratic K smooths. The
    // u-varying test block comes from the quadratic parametric companion,
    // which spans the same derivative terms.
    const RobinsonArm a1 = robinson_arm(d, spec, fit, rows1, curve.u_grid);
    const RobinsonArm a0 = robinson_arm(d, spec, fit, rows0, curve.u_grid);
    if (ncov > 0) {
        curve.observed_diff.names = spec.covariates;
        curve.observed_diff.coef = a1.beta - a0.beta;
        curve.observed_diff.cov = a1.cov + a0.cov;
        curve.observed_diff.n = static_cast<int>(pool.size());
        curve.xbar_level = xbar.tail(ncov).dot(curve.observed_diff.coef);
    }
    const stats::FitResult q1 = arm_parametric(d, spec, fit, rows1, 2);
    const stats::FitResult q0 = arm_parametric(d, spec, fit, rows0, 2);
    unobs_block(q1, q0, 2, k, &curve.unobs_coef, &curve.unobs_cov);

    for (Eigen::Index g = 0; g < G; ++g) {
        const double u = curve.u_grid(g);
        if (u < cs.lo || u > cs.hi) continue;
        if (!a1.m.defined[static_cast<std::size_t>(g)] ||
            !a0.m.defined[static_cast<std::size_t>(g)]) {
            continue;
        }
        curve.mte(g) = curve.xbar_level + a1.m.value(g) + u * a1.m.deriv(g) -
                       a0.m.value(g) + (1.0 - u) * a0.m.deriv(g);
        curve.defined[static_cast<std::size_t>(g)] = 1;
    }
    return curve;
}

MteCurve mte_bootstrap(const Dataset& d, const PropensitySpec& pspec, const MteSpec& spec,
                       MteMethod method, int B, std::uint64_t seed,
                       const Eigen::VectorXd& u_grid) {
    if (B < 2) throw ValidationError("mte_bootstrap: need at least 2 replications");
    const PropensityFit fit = estimate_propensity(d, pspec);
    MteCurve base = mte_separate(d, fit, spec, method, u_grid);

    const Eigen::Index G = base.u_grid.size();
    std::vector<std::vector<double>> draws(static_cast<std::size_t>(G));
    int failed = 0;
    std::vector<std::string> messages;
    const std::size_t n = d.size();
    for (int r = 0; r < B; ++r) {
        auto rng = make_stream(seed, static_cast<std::uint64_t>(r));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<Eigen::Index> rows(n);
        for (auto& idx : rows) idx = static_cast<Eigen::Index>(pick(rng));
        try {
            const Dataset rd = d.resampled(rows);
            const PropensityFit rfit = estimate_propensity(rd, pspec);
            const MteCurve rc = mte_separate(rd, rfit, spec, method, base.u_grid);
            for (Eigen::Index g = 0; g < G; ++g) {
                if (rc.defined[static_cast<std::size_t>(g)]) {
                    draws[static_cast<std::size_t>(g)].push_back(rc.mte(g));
                }
            }
        } catch (const std::exception& e) {
            ++failed;
            const std::string what = e.what();
            if (messages.size() < 5 &&
                std::find(messages.begin(), messages.end(), what) == messages.end()) {
                messages.push_back(what);
            }
        }
    }
    if (failed * 5 > B) {
        std::ostringstream msg;
        msg << "mte_bootstrap: " << failed << " of " << B << " replications failed";
        for (const auto& m : messages) msg << "\n  " << m;
        throw EstimationError(msg.str());
    }

    const int succeeded = B - failed;
    for (Eigen::Index g = 0; g < G; ++g) {
        auto& v = draws[static_cast<std::size_t>(g)];
        if (v.size() < 2 || static_cast<int>(v.size()) * 2 < succeeded) continue;
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        base.se(g) = std::sqrt(ss / (v.size() - 1.0));
        base.band_lo(g) = stats::percentile(v, 0.025);
        base.band_hi(g) = stats::percentile(v, 0.975);
    }
    return base;
}

HeterogeneityTests heterogeneity_tests(const MteCurve& curve) {
    HeterogeneityTests t;
    if (curve.observed_diff.coef.size() > 0) {
        t.df_observable = static_cast<int>(curve.observed_diff.coef.size());
        t.p_observable =
            wald(curve.observed_diff.coef, curve.observed_diff.cov, &t.stat_observable);
    }
    if (curve.unobs_coef.size() > 0) {
        t.df_unobservable = static_cast<int>(curve.unobs_coef.size());
        t.p_unobservable = wald(curve.unobs_coef, curve.unobs_cov, &t.stat_unobservable);
    }
    return t;
}

} // namespace bargainlab::mte
