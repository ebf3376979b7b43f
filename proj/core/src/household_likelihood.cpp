#include <cmath>
#include <limits>

#include "bargainlab/distributions.hpp"
#include "bargainlab/errors.hpp"
#include "bargainlab/household_model.hpp"
#include "household_internal.hpp"

namespace bargainlab::household {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.9189385332046727418;
} // namespace

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::unrestricted: return "unrestricted";
        case ModelKind::unitary: return "unitary";
        case ModelKind::collective: return "collective";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "unrestricted") return ModelKind::unrestricted;
    if (s == "unitary") return ModelKind::unitary;
    if (s == "collective") return ModelKind::collective;
    throw ValidationError("unknown model kind '" + s + "'");
}

int constraint_count(ModelKind k) {
    switch (k) {
        case ModelKind::unitary: return 4;
        case ModelKind::collective: return 2;
        case ModelKind::unrestricted: return 0;
    }
    return 0;
}

Eigen::VectorXd constraint_residuals(const ModelParams& p, ModelKind kind) {
    if (kind == ModelKind::unrestricted) return Eigen::VectorXd();
    const double gamma_p = -p.bp / p.bt;
    const double gamma_y = -p.by / p.bt;
    if (kind == ModelKind::unitary) {
        Eigen::VectorXd r(4);
        r(0) = p.At - p.Ay;
        r(1) = p.at;
        r(2) = (1.0 + gamma_y) * (p.ay - p.Ay);
        r(3) = p.Ay * gamma_p - ((1.0 + gamma_y) * p.ap_star - p.Ap_star);
        return r;
    }
    // Collective restrictions in product form, so no regime difference
    // sits in a denominator.
    Eigen::VectorXd r(2);
    r(0) = gamma_y * (p.At - p.at) + (p.Ay - p.ay);
    r(1) = gamma_y * (p.Ap_star - p.ap_star) - gamma_p * (p.Ay - p.ay);
    return r;
}

namespace detail {

LikContext build_context(const Dataset& d, const LikelihoodSpec& spec) {
    if (d.size() == 0) throw ValidationError("household likelihood: empty dataset");
    if (spec.endowment <= 0.0) {
        throw ValidationError("household likelihood: endowment must be positive");
    }
    if (spec.nodes < 1 || spec.nodes > 64) {
        throw ValidationError("household likelihood: nodes must lie in [1, 64]");
    }
    const auto& recs = d.records();

    std::size_t with_cf = 0;
    for (const auto& r : recs) {
        if (!r.teen_wage.has_value()) {
            throw ValidationError("household likelihood: record '" + r.id +
                                  "' has no teen wage; impute wages first");
        }
        if (r.cf_residual.has_value()) ++with_cf;
    }
    bool cf = false;
    if (spec.use_cf_residual && with_cf > 0) {
        if (with_cf != recs.size()) {
            throw ValidationError(
                "household likelihood: cf_residual present on some records only");
        }
        cf = true;
    }

    std::vector<Eigen::VectorXd> cols;
    cols.reserve(spec.covariates.size());
    for (const auto& name : spec.covariates) cols.push_back(d.column(name));

    LikContext ctx;
    ctx.rule = stats::gauss_hermite(spec.nodes);
    ctx.cf_used = cf;
    ctx.n_covariates = static_cast<int>(spec.covariates.size()) + (cf ? 1 : 0);
    ctx.rows.resize(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        RecordTerms t;
        t.m = r.parent_market_hours / spec.endowment;
        t.lnwp = std::log(r.parent_wage);
        t.wt = *r.teen_wage;
        t.lnwt = std::log(t.wt);
        t.ystar = r.nonlabor_income + r.transfer_amount;
        t.school = r.schooling == 1;
        t.treated = r.treated == 1;
        t.has_home = r.parent_domestic_hours > 0.0 && r.teen_domestic_hours > 0.0;
        if (t.has_home) {
            t.dh = std::log(r.parent_domestic_hours / r.teen_domestic_hours) -
                   (t.lnwt - t.lnwp);
        }
        t.x.resize(ctx.n_covariates);
        for (std::size_t j = 0; j < cols.size(); ++j) {
            t.x(static_cast<Eigen::Index>(j)) = cols[j](static_cast<Eigen::Index>(i));
        }
        if (cf) t.x(ctx.n_covariates - 1) = *r.cf_residual;
        ctx.rows[i] = std::move(t);
    }
    return ctx;
}

CallConstants make_call_constants(const ModelParams& p,
                                  const stats::GaussHermiteRule& rule) {
    CallConstants cc;
    cc.valid = p.alpha > 0.0 && p.alpha < 1.0 && p.sigma_w > 0.0 && p.sigma_s > 0.0;
    cc.sd_h_ok = p.sigma_h > 0.0;
    if (!cc.valid) return cc;

    // Factor composites per equation; chi_w = 1 makes the work loading
    // sigma_eta itself.
    const double c_w = p.sigma_eta;
    const double c_s = p.chi_s * p.sigma_eta;
    cc.c_t = p.chi_t * p.sigma_eta;
    const double c_h = p.chi_h * p.sigma_eta;

    cc.inv_sd_w = 1.0 / p.sigma_w;
    cc.ln_sd_w = std::log(p.sigma_w);
    cc.inv_sd_s = 1.0 / p.sigma_s;
    cc.ln_sd_s = std::log(p.sigma_s);
    if (cc.sd_h_ok) {
        cc.inv_sd_h = 1.0 / p.sigma_h;
        cc.ln_sd_h = std::log(p.sigma_h);
    }
    cc.ln_alpha_ratio = std::log(p.alpha / (1.0 - p.alpha));

    const Eigen::ArrayXd e = rule.nodes.array();
    cc.lw = rule.weights.array().log();
    cc.ct_e = cc.c_t * e;
    cc.ch_e = c_h * e;
    cc.cw_e = c_w * e;
    cc.cs_e = c_s * e;
    return cc;
}

double record_loglik(const ModelParams& p, const RecordTerms& t,
                     const CallConstants& cc) {
    if (!cc.valid) return kNegInf;
    if (t.has_home && !cc.sd_h_ok) return kNegInf;

    double mu, inv_sd, ln_sd;
    const Eigen::ArrayXd* load_e;
    if (t.school) {
        mu = p.const_s + p.ap_star * t.lnwp + p.at * t.wt + p.ay * t.ystar +
             p.delta * t.lnwt + p.beta_s.dot(t.x);
        inv_sd = cc.inv_sd_s;
        ln_sd = cc.ln_sd_s;
        load_e = &cc.cs_e;
    } else {
        mu = p.const_w + p.Ap_star * t.lnwp + p.At * t.wt + p.Ay * t.ystar +
             p.delta * t.lnwt + p.beta_w.dot(t.x);
        inv_sd = cc.inv_sd_w;
        ln_sd = cc.ln_sd_w;
        load_e = &cc.cw_e;
    }

    const double resid = t.m - mu;
    const double idx = !t.treated
                           ? p.b0 + p.bt * t.wt + p.bp * t.lnwp + p.by * t.ystar +
                                 p.beta_t.dot(t.x)
                           : 0.0;
    const double sign = t.school ? 1.0 : -1.0;
    const double dh0 = t.has_home ? t.dh - cc.ln_alpha_ratio : 0.0;
    const double base = -kLogSqrt2Pi - ln_sd;
    const double home_base = -kLogSqrt2Pi - cc.ln_sd_h;

    double best = kNegInf;
    double terms[64];
    const int K = static_cast<int>(cc.lw.size());
    for (int k = 0; k < K; ++k) {
        const double zr = (resid - (*load_e)(k)) * inv_sd;
        double v = cc.lw(k) - 0.5 * zr * zr + base;
        if (!t.treated) v += stats::log_norm_cdf(sign * (idx + cc.ct_e(k)));
        if (t.has_home) {
            const double zh = (dh0 - cc.ch_e(k)) * cc.inv_sd_h;
            v += -0.5 * zh * zh + home_base;
        }
        terms[k] = v;
        if (v > best) best = v;
    }
    if (!std::isfinite(best)) return kNegInf;
    const double acc =
        (Eigen::Map<Eigen::ArrayXd>(terms, K) - best).exp().sum();
    const double out = best + std::log(acc);
    return std::isfinite(out) ? out : kNegInf;
}

double total_loglik(const ModelParams& p, const LikContext& ctx, std::size_t* nonfinite) {
    const Eigen::Index cx = ctx.rows.empty() ? 0 : ctx.rows.front().x.size();
    if (p.beta_w.size() != cx || p.beta_s.size() != cx || p.beta_t.size() != cx) {
        throw ValidationError("household likelihood: covariate block length mismatch");
    }
    const CallConstants cc = make_call_constants(p, ctx.rule);
    double sum = 0.0;
    std::size_t bad = 0;
    for (const auto& t : ctx.rows) {
        const double li = record_loglik(p, t, cc);
        if (!std::isfinite(li)) {
            ++bad;
        } else {
            sum += li;
        }
    }
    if (nonfinite != nullptr) *nonfinite = bad;
    return bad > 0 ? kNegInf : sum;
}

} // namespace detail

double household_loglik(const ModelParams& p, const HouseholdRecord& rec,
                        const LikelihoodSpec& spec, const stats::GaussHermiteRule& rule) {
    if (rule.nodes.size() == 0 || rule.nodes.size() > 64) {
        throw ValidationError("household_loglik: rule must carry 1 to 64 nodes");
    }
    if (!rec.teen_wage.has_value()) {
        throw ValidationError("household_loglik: record '" + rec.id +
                              "' has no teen wage; impute wages first");
    }
    if (spec.endowment <= 0.0) {
        throw ValidationError("household_loglik: endowment must be positive");
    }
    const bool cf = spec.use_cf_residual && rec.cf_residual.has_value();

    detail::RecordTerms t;
    t.m = rec.parent_market_hours / spec.endowment;
    t.lnwp = std::log(rec.parent_wage);
    t.wt = *rec.teen_wage;
    t.lnwt = std::log(t.wt);
    t.ystar = rec.nonlabor_income + rec.transfer_amount;
    t.school = rec.schooling == 1;
    t.treated = rec.treated == 1;
    t.has_home = rec.parent_domestic_hours > 0.0 && rec.teen_domestic_hours > 0.0;
    if (t.has_home) {
        t.dh = std::log(rec.parent_domestic_hours / rec.teen_domestic_hours) -
               (t.lnwt - t.lnwp);
    }
    const Eigen::Index nc = static_cast<Eigen::Index>(spec.covariates.size());
    if (rec.covariates.size() < nc) {
        throw ValidationError("household_loglik: record carries fewer covariates than "
                              "the spec names");
    }
    t.x.resize(nc + (cf ? 1 : 0));
    // A lone record has no covariate-name table, so the spec's covariate
    // list is taken positionally against the record's vector.
    for (Eigen::Index j = 0; j < nc; ++j) t.x(j) = rec.covariates(j);
    if (cf) t.x(nc) = *rec.cf_residual;
    if (p.beta_w.size() != t.x.size() || p.beta_s.size() != t.x.size() ||
        p.beta_t.size() != t.x.size()) {
        throw ValidationError("household_loglik: covariate block length mismatch");
    }
    return detail::record_loglik(p, t, detail::make_call_constants(p, rule));
}

} // namespace bargainlab::household
