#include <algorithm>
#include <cmath>
#include <limits>

#include "bargainlab/distributions.hpp"
#include "bargainlab/errors.hpp"
#include "bargainlab/home_production.hpp"
#include "bargainlab/household_model.hpp"
#include "bargainlab/ols.hpp"
#include "bargainlab/probit.hpp"
#include "household_internal.hpp"

namespace bargainlab::household {

namespace {

using detail::LikContext;

// Free-parameter layout per kind. The optimizer works on the raw-hours
// scale (hours-equation entries multiplied by the endowment) because the
// normalized scale packs curvatures spanning seven orders of magnitude;
// unpack returns the normalized parameterization the likelihood uses.
// The factor block is packed as per-equation composites (work loading
// ln sigma_eta, then c_j = chi_j sigma_eta on each equation's own scale),
// which keeps every packed entry near unit size.
struct Packer {
    ModelKind kind = ModelKind::unrestricted;
    int c = 0;
    double E = 98.0;
    bool joint_alpha = false;
    double fixed_alpha = 0.5;

    int mean_count() const {
        switch (kind) {
            case ModelKind::unrestricted: return 13;
            case ModelKind::unitary: return 9;
            case ModelKind::collective: return 11;
        }
        return 13;
    }
    int tail_start() const { return mean_count() + 3 * c; }
    int size() const { return tail_start() + 7 + (joint_alpha ? 1 : 0); }

    std::vector<std::string> names(const std::vector<std::string>& covs) const {
        std::vector<std::string> out;
        switch (kind) {
            case ModelKind::unrestricted:
                out = {"const_w", "Ap_star", "At", "Ay", "const_s", "ap_star", "at",
                       "ay",      "delta",   "b0", "bt", "bp",      "by"};
                break;
            case ModelKind::unitary:
                out = {"const_w", "Ap_star", "Ay", "const_s", "delta",
                       "b0",      "bt",      "bp", "by"};
                break;
            case ModelKind::collective:
                out = {"const_w", "Ay", "const_s", "ap_star", "at", "ay",
                       "delta",   "b0", "bt",      "bp",      "by"};
                break;
        }
        for (const char* block : {"beta_w", "beta_s", "beta_t"}) {
            for (const auto& v : covs) out.push_back(std::string(block) + ":" + v);
        }
        out.insert(out.end(), {"ln_sigma_w", "ln_sigma_s", "ln_sigma_eta", "c_s", "c_t",
                               "c_h", "ln_sigma_h"});
        if (joint_alpha) out.push_back("alpha_logit");
        return out;
    }

    Eigen::VectorXd pack(const ModelParams& p) const {
        Eigen::VectorXd th(size());
        int i = 0;
        switch (kind) {
            case ModelKind::unrestricted:
                th(i++) = p.const_w * E;
                th(i++) = p.Ap_star * E;
                th(i++) = p.At * E;
                th(i++) = p.Ay * E;
                th(i++) = p.const_s * E;
                th(i++) = p.ap_star * E;
                th(i++) = p.at * E;
                th(i++) = p.ay * E;
                th(i++) = p.delta * E;
                break;
            case ModelKind::unitary:
                th(i++) = p.const_w * E;
                th(i++) = p.Ap_star * E;
                th(i++) = p.Ay * E;
                th(i++) = p.const_s * E;
                th(i++) = p.delta * E;
                break;
            case ModelKind::collective:
                th(i++) = p.const_w * E;
                th(i++) = p.Ay * E;
                th(i++) = p.const_s * E;
                th(i++) = p.ap_star * E;
                th(i++) = p.at * E;
                th(i++) = p.ay * E;
                th(i++) = p.delta * E;
                break;
        }
        th(i++) = p.b0;
        th(i++) = p.bt;
        th(i++) = p.bp;
        th(i++) = p.by;
        for (int j = 0; j < c; ++j) th(i++) = p.beta_w(j) * E;
        for (int j = 0; j < c; ++j) th(i++) = p.beta_s(j) * E;
        for (int j = 0; j < c; ++j) th(i++) = p.beta_t(j);
        const double floor = 1e-8;
        th(i++) = std::log(std::max(p.sigma_w * E, floor));
        th(i++) = std::log(std::max(p.sigma_s * E, floor));
        th(i++) = std::log(std::max(p.sigma_eta * E, floor));
        th(i++) = p.chi_s * p.sigma_eta * E;
        th(i++) = p.chi_t * p.sigma_eta;
        th(i++) = p.chi_h * p.sigma_eta;
        th(i++) = std::log(std::max(p.sigma_h, floor));
        if (joint_alpha) {
            const double a = std::clamp(p.alpha, 1e-6, 1.0 - 1e-6);
            th(i++) = std::log(a / (1.0 - a));
        }
        return th;
    }

    ModelParams unpack(const Eigen::VectorXd& th) const {
        ModelParams p;
        int i = 0;
        switch (kind) {
            case ModelKind::unrestricted:
                p.const_w = th(i++) / E;
                p.Ap_star = th(i++) / E;
                p.At = th(i++) / E;
                p.Ay = th(i++) / E;
                p.const_s = th(i++) / E;
                p.ap_star = th(i++) / E;
                p.at = th(i++) / E;
                p.ay = th(i++) / E;
                p.delta = th(i++) / E;
                break;
            case ModelKind::unitary:
                p.const_w = th(i++) / E;
                p.Ap_star = th(i++) / E;
                p.Ay = th(i++) / E;
                p.const_s = th(i++) / E;
                p.delta = th(i++) / E;
                break;
            case ModelKind::collective:
                p.const_w = th(i++) / E;
                p.Ay = th(i++) / E;
                p.const_s = th(i++) / E;
                p.ap_star = th(i++) / E;
                p.at = th(i++) / E;
                p.ay = th(i++) / E;
                p.delta = th(i++) / E;
                break;
        }
        p.b0 = th(i++);
        p.bt = th(i++);
        p.bp = th(i++);
        p.by = th(i++);
        p.beta_w.resize(c);
        p.beta_s.resize(c);
        p.beta_t.resize(c);
        for (int j = 0; j < c; ++j) p.beta_w(j) = th(i++) / E;
        for (int j = 0; j < c; ++j) p.beta_s(j) = th(i++) / E;
        for (int j = 0; j < c; ++j) p.beta_t(j) = th(i++);

        if (kind == ModelKind::unitary) {
            const double gamma_p = -p.bp / p.bt;
            const double gamma_y = -p.by / p.bt;
            p.At = p.Ay;
            p.ay = p.Ay;
            p.at = 0.0;
            p.ap_star = (p.Ay * gamma_p + p.Ap_star) / (1.0 + gamma_y);
        } else if (kind == ModelKind::collective) {
            const double gamma_p = -p.bp / p.bt;
            const double gamma_y = -p.by / p.bt;
            p.At = p.at - (p.Ay - p.ay) / gamma_y;
            p.Ap_star = p.ap_star + (p.Ay - p.ay) * gamma_p / gamma_y;
        }

        const double lnsw = th(i++);
        const double lnss = th(i++);
        const double lnse = th(i++);
        const double cs = th(i++);
        const double ct = th(i++);
        const double ch = th(i++);
        const double lnsh = th(i++);
        p.sigma_w = std::exp(lnsw) / E;
        p.sigma_s = std::exp(lnss) / E;
        p.sigma_eta = std::exp(lnse) / E;
        p.chi_s = cs / std::exp(lnse);
        p.chi_t = ct * E / std::exp(lnse);
        p.chi_h = ch * E / std::exp(lnse);
        p.sigma_h = std::exp(lnsh);
        p.alpha = joint_alpha ? 1.0 / (1.0 + std::exp(-th(i++))) : fixed_alpha;
        return p;
    }

    // Affine map from the packed scale to the reported (normalized) free
    // parameterization: multiplicative part and shift per entry.
    void report_transform(Eigen::VectorXd* scale, Eigen::VectorXd* shift) const {
        scale->setOnes(size());
        shift->setZero(size());
        const int mc = mean_count();
        // hours-equation mean entries, then the schooling block of 4
        for (int i = 0; i < mc - 4; ++i) (*scale)(i) = 1.0 / E;
        for (int j = 0; j < c; ++j) {
            (*scale)(mc + j) = 1.0 / E;
            (*scale)(mc + c + j) = 1.0 / E;
        }
        const int t = tail_start();
        (*shift)(t) = -std::log(E);     // ln sigma_w
        (*shift)(t + 1) = -std::log(E); // ln sigma_s
        (*shift)(t + 2) = -std::log(E); // ln sigma_eta
        (*scale)(t + 3) = 1.0 / E;      // c_s rides on the hours equation
    }
};

Eigen::VectorXd reduced_of(const ModelParams& p) {
    Eigen::VectorXd r(11);
    r << p.Ap_star, p.At, p.Ay, p.ap_star, p.at, p.ay, p.delta, p.b0, p.bt, p.bp, p.by;
    return r;
}

const std::vector<std::string> kReducedNames{"Ap_star", "At", "Ay", "ap_star", "at", "ay",
                                             "delta",   "b0", "bt", "bp",      "by"};

ModelParams warm_start(const LikContext& ctx, double alpha_start) {
    const int c = ctx.n_covariates;
    int n_w = 0, n_s = 0;
    for (const auto& t : ctx.rows) (t.school ? n_s : n_w)++;
    const int need = 6 + c;
    if (n_w < need || n_s < need) {
        throw EstimationError("fit_model: a regime has too few households (" +
                              std::to_string(n_w) + " working, " + std::to_string(n_s) +
                              " studying) for " + std::to_string(need) + " coefficients");
    }

    auto regime_design = [&](bool school, Eigen::MatrixXd* X, Eigen::VectorXd* y) {
        const int rows = school ? n_s : n_w;
        X->resize(rows, 5 + c);
        y->resize(rows);
        int r = 0;
        for (const auto& t : ctx.rows) {
            if (t.school != school) continue;
            (*X)(r, 0) = 1.0;
            (*X)(r, 1) = t.lnwp;
            (*X)(r, 2) = t.wt;
            (*X)(r, 3) = t.ystar;
            (*X)(r, 4) = t.lnwt;
            for (int j = 0; j < c; ++j) (*X)(r, 5 + j) = t.x(j);
            (*y)(r) = t.m;
            ++r;
        }
    };
    std::vector<std::string> dn{"const", "lnwp", "wt", "ystar", "lnwt"};
    for (int j = 0; j < c; ++j) dn.push_back("x" + std::to_string(j));

    Eigen::MatrixXd Xw, Xs;
    Eigen::VectorXd yw, ys;
    regime_design(false, &Xw, &yw);
    regime_design(true, &Xs, &ys);
    const stats::FitResult w_fit = stats::ols_fit(Xw, yw, dn);
    const stats::FitResult s_fit = stats::ols_fit(Xs, ys, dn);
    const double sd_w = std::max(
        1e-6, std::sqrt((yw - Xw * w_fit.coef).squaredNorm() / std::max(1, n_w - 5 - c)));
    const double sd_s = std::max(
        1e-6, std::sqrt((ys - Xs * s_fit.coef).squaredNorm() / std::max(1, n_s - 5 - c)));

    ModelParams p;
    p.const_w = w_fit.coef(0);
    p.Ap_star = w_fit.coef(1);
    p.At = w_fit.coef(2);
    p.Ay = w_fit.coef(3);
    p.const_s = s_fit.coef(0);
    p.ap_star = s_fit.coef(1);
    p.at = s_fit.coef(2);
    p.ay = s_fit.coef(3);
    p.delta = 0.5 * (w_fit.coef(4) + s_fit.coef(4));
    p.beta_w = w_fit.coef.segment(5, c);
    p.beta_s = s_fit.coef.segment(5, c);
    p.beta_t = Eigen::VectorXd::Zero(c);

    // Schooling block from a probit over the untreated; fall back to the
    // marginal share if the probit degenerates.
    int n_u = 0, n_u_school = 0;
    for (const auto& t : ctx.rows) {
        if (t.treated) continue;
        ++n_u;
        if (t.school) ++n_u_school;
    }
    bool probit_done = false;
    if (n_u >= need) {
        Eigen::MatrixXd Xp(n_u, 4 + c);
        Eigen::VectorXd dv(n_u);
        int r = 0;
        for (const auto& t : ctx.rows) {
            if (t.treated) continue;
            Xp(r, 0) = 1.0;
            Xp(r, 1) = t.wt;
            Xp(r, 2) = t.lnwp;
            Xp(r, 3) = t.ystar;
            for (int j = 0; j < c; ++j) Xp(r, 4 + j) = t.x(j);
            dv(r) = t.school ? 1.0 : 0.0;
            ++r;
        }
        std::vector<std::string> pn{"const", "wt", "lnwp", "ystar"};
        for (int j = 0; j < c; ++j) pn.push_back("x" + std::to_string(j));
        try {
            const stats::FitResult pr = stats::probit_fit(Xp, dv, pn);
            p.b0 = pr.coef(0);
            p.bt = pr.coef(1);
            p.bp = pr.coef(2);
            p.by = pr.coef(3);
            p.beta_t = pr.coef.segment(4, c);
            probit_done = true;
        } catch (const EstimationError&) {
        }
    }
    if (!probit_done) {
        const double share =
            std::clamp(n_u > 0 ? static_cast<double>(n_u_school) / n_u : 0.5, 0.02, 0.98);
        p.b0 = stats::norm_quantile(share);
        // Keep the frontier ratios finite and nonzero so the restricted
        // reparameterizations stay defined at the start.
        p.bt = -0.1;
        p.bp = 0.04;
        p.by = 0.05;
    }

    double sd_h = 1.0;
    int n_home = 0;
    double mean_dh = 0.0, ss_dh = 0.0;
    const double c_alpha = std::log(alpha_start / (1.0 - alpha_start));
    for (const auto& t : ctx.rows) {
        if (!t.has_home) continue;
        ++n_home;
        const double v = t.dh - c_alpha;
        mean_dh += v;
        ss_dh += v * v;
    }
    if (n_home > 1) {
        mean_dh /= n_home;
        sd_h = std::max(1e-6, std::sqrt(ss_dh / n_home - mean_dh * mean_dh));
    }

    // Split each residual scale between the factor and the idiosyncratic
    // part; the exact split only has to land in the basin.
    p.sigma_eta = 0.5 * sd_w;
    p.sigma_w = 0.8 * sd_w;
    p.sigma_s = 0.8 * sd_s;
    p.chi_s = (0.5 * sd_s) / p.sigma_eta;
    p.chi_t = 0.3 / p.sigma_eta;
    p.chi_h = (0.3 * sd_h) / p.sigma_eta;
    p.sigma_h = 0.85 * sd_h;
    p.alpha = alpha_start;
    return p;
}

} // namespace

ReducedFormEstimates fit_model(const Dataset& d, const FitOptions& opt) {
    if (opt.alpha.has_value() && !(*opt.alpha > 0.0 && *opt.alpha < 1.0)) {
        throw ValidationError("fit_model: fixed alpha must lie in (0, 1)");
    }
    const double alpha = opt.alpha.has_value() ? *opt.alpha : estimate_alpha(d).alpha;
    const LikContext ctx = detail::build_context(d, opt.lik);

    Packer pk;
    pk.kind = opt.kind;
    pk.c = ctx.n_covariates;
    pk.E = opt.lik.endowment;
    pk.joint_alpha = opt.joint_alpha;
    pk.fixed_alpha = alpha;

    const auto objective = [&](const Eigen::VectorXd& th) {
        return detail::total_loglik(pk.unpack(th), ctx, nullptr);
    };

    ModelParams start;
    if (opt.start.has_value()) {
        start = *opt.start;
        const auto k = static_cast<Eigen::Index>(ctx.n_covariates);
        if (start.beta_w.size() != k || start.beta_s.size() != k ||
            start.beta_t.size() != k) {
            throw ValidationError("fit_model: start value's beta blocks do not match "
                                  "the covariate list");
        }
    } else {
        start = warm_start(ctx, alpha);
    }
    Eigen::VectorXd th0 = pk.pack(start);
    int inflate = 0;
    while (!std::isfinite(objective(th0))) {
        if (++inflate > 5) {
            throw EstimationError("fit_model: likelihood not finite at the start value");
        }
        start.sigma_w *= 3.0;
        start.sigma_s *= 3.0;
        start.sigma_h *= 3.0;
        start.sigma_eta *= 3.0;
        th0 = pk.pack(start);
    }

    const stats::FitResult res = stats::maximize_loglik(objective, th0, opt.optimize);
    const ModelParams at_opt = pk.unpack(res.coef);

    const Eigen::VectorXd cres = constraint_residuals(at_opt, opt.kind);
    if (cres.size() > 0) {
        const double worst = cres.cwiseAbs().maxCoeff();
        if (!(worst <= 1e-8)) {
            throw EstimationError("fit_model: " + to_string(opt.kind) +
                                  " constraint residual " + std::to_string(worst) +
                                  " at the optimum; the reparameterization is broken");
        }
    }

    ReducedFormEstimates est;
    est.kind = opt.kind;
    est.params = at_opt;
    est.n = static_cast<int>(d.size());
    est.cf_used = ctx.cf_used;
    est.converged = res.converged;
    est.warnings = res.warnings;
    est.loglik = res.loglik.value();
    detail::total_loglik(at_opt, ctx, &est.nonfinite_records);

    std::vector<std::string> covs = opt.lik.covariates;
    if (ctx.cf_used) covs.push_back("cf_residual");
    est.free_fit = res;
    est.free_fit.names = pk.names(covs);
    est.free_fit.n = est.n;
    Eigen::VectorXd scale, shift;
    pk.report_transform(&scale, &shift);
    est.free_fit.coef = scale.cwiseProduct(res.coef) + shift;
    est.free_fit.cov = scale.asDiagonal() * res.cov * scale.asDiagonal();

    // Reduced block and its covariance by the delta method through the
    // packing (which folds the restricted reparameterizations in).
    est.reduced_names = kReducedNames;
    est.reduced = reduced_of(at_opt);
    const Eigen::Index p = res.coef.size();
    Eigen::MatrixXd J(11, p);
    Eigen::VectorXd t = res.coef;
    for (Eigen::Index i = 0; i < p; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(res.coef(i)));
        t(i) = res.coef(i) + h;
        const Eigen::VectorXd up = reduced_of(pk.unpack(t));
        t(i) = res.coef(i) - h;
        const Eigen::VectorXd dn = reduced_of(pk.unpack(t));
        t(i) = res.coef(i);
        J.col(i) = (up - dn) / (2.0 * h);
    }
    est.cov_reduced = stats::symmetrize(J * res.cov * J.transpose());
    return est;
}

} // namespace bargainlab::household
