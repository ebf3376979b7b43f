#include "bargainlab/simulate.hpp"

#include <cmath>
#include <random>

#include "bargainlab/distributions.hpp"
#include "bargainlab/errors.hpp"
#include "bargainlab/rng.hpp"

namespace bargainlab::sim {

std::string to_string(TruthKind k) {
    switch (k) {
        case TruthKind::unitary: return "unitary";
        case TruthKind::collective: return "collective";
        case TruthKind::mte_scenario: return "mte_scenario";
    }
    return "unknown";
}

TruthKind truth_kind_from_string(const std::string& s) {
    if (s == "unitary") return TruthKind::unitary;
    if (s == "collective") return TruthKind::collective;
    if (s == "mte_scenario") return TruthKind::mte_scenario;
    throw ValidationError("unknown truth kind '" + s + "'");
}

double MteTruth::mte_at(double u, double x) const {
    return ate + (beta1 - beta0) * x + slope * stats::norm_quantile(u);
}

namespace {

// Switching-system coefficients implied by the configured truth, on the
// raw weekly-hours scale. The collective block follows the sharing-rule
// chain: differentiating M = theta_w ln w^p + theta_rho rho^p +
// theta_K ln g_K through rho^p = income - rho^t, with the teen share
// rho^t moving one-for-one with the psi block while working and with
// slope F' while studying.
struct TruthCoefs {
    double const_w = 0.0, Ap_star = 0.0, At = 0.0, Ay = 0.0;
    double const_s = 0.0, ap_star = 0.0, at = 0.0, ay = 0.0;
    double delta = 0.0;
    double b0 = 0.0, bt = 0.0, bp = 0.0, by = 0.0;
    double gamma_p = 0.0, gamma_y = 0.0;
};

TruthCoefs derive_truth_coefs(const SimConfig& cfg) {
    TruthCoefs c;
    c.const_w = cfg.work_const;
    c.const_s = cfg.school_const;
    c.b0 = cfg.frontier_b0;
    c.bt = cfg.frontier_bt;
    if (cfg.truth_kind == TruthKind::collective) {
        const double F = cfg.theta_t_rho;
        c.gamma_y = cfg.psi_y * (1.0 - F) / (1.0 - cfg.psi_t * (1.0 - F));
        c.gamma_p = c.gamma_y * cfg.psi_p / cfg.psi_y;
        c.At = cfg.theta_p_rho * (1.0 - cfg.psi_t);
        c.Ay = cfg.theta_p_rho * (1.0 - cfg.psi_y);
        c.at = -cfg.theta_p_rho * F * cfg.psi_t;
        c.ay = cfg.theta_p_rho * (1.0 - F * cfg.psi_y);
        const double home = cfg.theta_p_K * cfg.alpha;
        c.Ap_star = cfg.theta_p_w - cfg.theta_p_rho * cfg.psi_p + home;
        c.ap_star = cfg.theta_p_w - cfg.theta_p_rho * F * cfg.psi_p + home;
        c.delta = cfg.theta_p_K * (1.0 - cfg.alpha);
    } else {
        c.gamma_p = cfg.uni_gamma_p;
        c.gamma_y = cfg.uni_gamma_y;
        c.At = cfg.uni_A_com;
        c.Ay = cfg.uni_A_com;
        c.ay = cfg.uni_A_com;
        c.at = 0.0;
        c.Ap_star = cfg.uni_A_p_star;
        c.ap_star = (cfg.uni_A_com * c.gamma_p + cfg.uni_A_p_star) / (1.0 + c.gamma_y);
        c.delta = cfg.uni_delta;
    }
    c.bp = -c.gamma_p * c.bt;
    c.by = -c.gamma_y * c.bt;
    return c;
}

void check_household_config(const SimConfig& cfg) {
    if (cfg.n <= 0) throw ValidationError("generate: n must be positive");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        throw ValidationError("generate: alpha must lie in (0, 1)");
    }
    if (cfg.time_endowment <= 0.0 || cfg.m_bar_t <= 0.0) {
        throw ValidationError("generate: time endowment and teen work hours must be positive");
    }
    const double scales[] = {cfg.sigma_eta, cfg.sigma_w, cfg.sigma_s,
                             cfg.sigma_t,   cfg.sigma_h, cfg.parent_wage.sigma,
                             cfg.teen_wage.sigma, cfg.nonlabor.sigma};
    for (double s : scales) {
        if (s < 0.0) throw ValidationError("generate: scales must be nonnegative");
    }
    if (cfg.transfer_amount < 0.0) {
        throw ValidationError("generate: transfer amount must be nonnegative");
    }
    if (cfg.truth_kind == TruthKind::collective) {
        const double margin = std::abs((1.0 - cfg.theta_t_rho) * cfg.psi_t);
        if (margin >= 1.0) {
            throw ValidationError(
                "generate: |(1 - F') psi_t| must be below one for a collective truth");
        }
    }
}

} // namespace

Dataset generate(const SimConfig& cfg, SimTruth* truth) {
    if (cfg.truth_kind == TruthKind::mte_scenario) {
        throw ValidationError("generate: use generate_mte_scenario for potential-outcome draws");
    }
    check_household_config(cfg);
    const TruthCoefs tc = derive_truth_coefs(cfg);

    SimTruth ledger;
    ledger.share_parent.resize(cfg.n);
    ledger.share_teen.resize(cfg.n);
    ledger.public_spend.resize(cfg.n);
    ledger.y_star.resize(cfg.n);
    ledger.latent_school.resize(cfg.n);
    ledger.eta.resize(cfg.n);
    ledger.takeup.assign(static_cast<std::size_t>(cfg.n), 0);

    std::vector<HouseholdRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.n));
    const std::vector<std::string> covariates{"x_dem", "father_age"};

    // Home-input split of the required public output fbar: cost-minimal
    // Cobb-Douglas demands, in teen-work-time units.
    const double ratio_p = std::pow(cfg.alpha / (1.0 - cfg.alpha), 1.0 - cfg.alpha);
    const double ratio_t = std::pow((1.0 - cfg.alpha) / cfg.alpha, cfg.alpha);

    for (int i = 0; i < cfg.n; ++i) {
        auto rng = make_stream(cfg.seed, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> uniform(0.0, 1.0);

        // Fixed draw order so a record's shocks do not depend on the
        // truth kind or on another record's regime.
        const double z = uniform(rng);
        const double x = normal(rng);
        const double father_age = 35.0 + std::floor(uniform(rng) * 26.0);
        const double wp = std::exp(cfg.parent_wage.mu + cfg.parent_wage.sigma * normal(rng));
        const double wt = std::exp(cfg.teen_wage.mu + cfg.teen_wage.sigma * normal(rng));
        const double y = std::exp(cfg.nonlabor.mu + cfg.nonlabor.sigma * normal(rng));
        const double eta = cfg.sigma_eta * normal(rng);
        const double eps_w = cfg.sigma_w * normal(rng);
        const double eps_s = cfg.sigma_s * normal(rng);
        const double eps_t = cfg.sigma_t * normal(rng);
        const double eps_h = cfg.sigma_h * normal(rng);
        const double takeup_shock = normal(rng);

        const double lnwp = std::log(wp);
        const double lnwt = std::log(wt);

        // Schooling decides on pre-transfer income; the transfer then
        // reaches students whose household took the program up.
        const double idx_mean = tc.b0 + tc.bt * wt + tc.bp * lnwp + tc.by * y +
                                cfg.beta_x_latent * x;
        const int s = idx_mean + cfg.chi_t * eta + eps_t >= 0.0 ? 1 : 0;
        const int takeup = cfg.takeup_const + cfg.takeup_x * x + cfg.takeup_z * z >=
                                   takeup_shock
                               ? 1
                               : 0;
        const int d = takeup * s;
        const double ystar = y + (d == 1 ? cfg.transfer_amount : 0.0);

        double hours;
        if (s == 1) {
            hours = tc.const_s + tc.ap_star * lnwp + tc.at * wt + tc.ay * ystar +
                    tc.delta * lnwt + cfg.beta_x_school * x + cfg.chi_s * eta + eps_s;
        } else {
            hours = tc.const_w + tc.Ap_star * lnwp + tc.At * wt + tc.Ay * ystar +
                    tc.delta * lnwt + cfg.beta_x_work * x + cfg.chi_w * eta + eps_w;
        }
        if (hours < 0.0 || hours > cfg.time_endowment) {
            throw ValidationError(
                "generate: configured coefficients push parent market hours outside "
                "[0, endowment]; rescale the truth");
        }

        // Required public output and its cost-minimal input split; the
        // log-ratio error is billed to the parent's input so the teen's
        // stays on the demand curve.
        const double fbar = cfg.fbar0 + cfg.fbar_y * ystar;
        if (fbar <= 0.0) {
            throw ValidationError("generate: fbar must stay positive; adjust fbar0/fbar_y");
        }
        const double u_h = cfg.chi_h * eta + eps_h;
        const double h_p = fbar * ratio_p * std::pow(wt / wp, 1.0 - cfg.alpha) * std::exp(u_h);
        const double h_t = fbar * ratio_t * std::pow(wp / wt, cfg.alpha);
        const double g_k = std::pow(wp / cfg.alpha, cfg.alpha) *
                           std::pow(wt / (1.0 - cfg.alpha), 1.0 - cfg.alpha);

        // Share ledger: the teen's share follows the psi block, scaled by
        // F' while studying; the parent keeps the income left after the
        // public-good outlay. Full income counts teen earnings (one unit
        // of w^t) only in the work regime. Unitary truths pool income.
        const double income = ystar + (s == 0 ? wt : 0.0);
        double rho_t = 0.0;
        if (cfg.truth_kind == TruthKind::collective) {
            const double base = cfg.psi_p * lnwp + cfg.psi_t * wt + cfg.psi_y * ystar;
            rho_t = s == 1 ? cfg.kappa_school + cfg.theta_t_rho * base
                           : cfg.kappa_work + base;
        }
        const double spend = g_k * fbar;

        ledger.share_teen(i) = rho_t;
        ledger.share_parent(i) = income - spend - rho_t;
        ledger.public_spend(i) = spend;
        ledger.y_star(i) = ystar;
        ledger.latent_school(i) = idx_mean;
        ledger.eta(i) = eta;
        ledger.takeup[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(takeup);

        HouseholdRecord r;
        r.id = "h" + std::to_string(i + 1);
        r.year = 2016;
        r.teen_gender = TeenGender::son;
        r.teen_age = 16.0;
        r.schooling = s;
        r.teen_market_hours = s == 1 ? 0.0 : cfg.m_bar_t;
        if (s == 1 && cfg.censor_student_wages) {
            r.teen_wage.reset();
        } else {
            r.teen_wage = wt;
        }
        r.teen_domestic_hours = h_t * cfg.m_bar_t;
        r.parent_wage = wp;
        r.parent_market_hours = hours;
        r.parent_domestic_hours = h_p * cfg.m_bar_t;
        r.nonlabor_income = y;
        r.treated = d;
        r.transfer_amount = d == 1 ? cfg.transfer_amount : 0.0;
        r.instrument = z;
        r.covariates.resize(2);
        r.covariates << x, father_age;
        records.push_back(std::move(r));
    }

    // Reduced map on the estimator's scale: hours-equation entries are
    // divided by the endowment (M = hours / endowment), the schooling and
    // home blocks are untouched, and the factor enters through the
    // per-equation composites c_j = chi_j * sigma_eta.
    const double E = cfg.time_endowment;
    ledger.reduced["const_w"] = tc.const_w / E;
    ledger.reduced["Ap_star"] = tc.Ap_star / E;
    ledger.reduced["At"] = tc.At / E;
    ledger.reduced["Ay"] = tc.Ay / E;
    ledger.reduced["const_s"] = tc.const_s / E;
    ledger.reduced["ap_star"] = tc.ap_star / E;
    ledger.reduced["at"] = tc.at / E;
    ledger.reduced["ay"] = tc.ay / E;
    ledger.reduced["delta"] = tc.delta / E;
    // The estimator pins sd(eps_t) at one, so the index block lands on
    // the probit scale when sigma_t differs from it.
    const double ts = cfg.sigma_t > 0.0 ? cfg.sigma_t : 1.0;
    ledger.reduced["b0"] = tc.b0 / ts;
    ledger.reduced["bt"] = tc.bt / ts;
    ledger.reduced["bp"] = tc.bp / ts;
    ledger.reduced["by"] = tc.by / ts;
    ledger.reduced["beta_x_work"] = cfg.beta_x_work / E;
    ledger.reduced["beta_x_school"] = cfg.beta_x_school / E;
    ledger.reduced["beta_x_latent"] = cfg.beta_x_latent / ts;
    ledger.reduced["gamma_p"] = tc.gamma_p;
    ledger.reduced["gamma_y"] = tc.gamma_y;
    ledger.reduced["alpha"] = cfg.alpha;
    ledger.reduced["sigma_eta"] = cfg.chi_w * cfg.sigma_eta / E;
    ledger.reduced["c_s"] = cfg.chi_s * cfg.sigma_eta / E;
    ledger.reduced["c_t"] = cfg.chi_t * cfg.sigma_eta / ts;
    ledger.reduced["c_h"] = cfg.chi_h * cfg.sigma_eta;
    ledger.reduced["sigma_w"] = cfg.sigma_w / E;
    ledger.reduced["sigma_s"] = cfg.sigma_s / E;
    ledger.reduced["sigma_t"] = cfg.sigma_t;
    ledger.reduced["sigma_h"] = cfg.sigma_h;
    if (cfg.truth_kind == TruthKind::collective) {
        ledger.reduced["F_prime"] = cfg.theta_t_rho;
        ledger.reduced["psi_p"] = cfg.psi_p;
        ledger.reduced["psi_t"] = cfg.psi_t;
        ledger.reduced["psi_y"] = cfg.psi_y;
        ledger.reduced["theta_p_rho"] = cfg.theta_p_rho / E;
        ledger.reduced["theta_p_w"] = cfg.theta_p_w / E;
    }

    if (truth != nullptr) *truth = std::move(ledger);
    return Dataset(std::move(records), covariates);
}

Dataset generate_mte_scenario(const SimConfig& cfg, MteTruth* truth) {
    if (cfg.truth_kind != TruthKind::mte_scenario) {
        throw ValidationError("generate_mte_scenario: truth_kind must be mte_scenario");
    }
    if (cfg.n <= 0) throw ValidationError("generate_mte_scenario: n must be positive");
    if (cfg.mte_sigma0 <= 0.0 || cfg.mte_sigma1 <= 0.0) {
        throw ValidationError("generate_mte_scenario: outcome scales must be positive");
    }

    Eigen::Matrix3d C;
    C << 1.0, cfg.mte_rho01, cfg.mte_rho0,
         cfg.mte_rho01, 1.0, cfg.mte_rho1,
         cfg.mte_rho0, cfg.mte_rho1, 1.0;
    // LDLT admits the boundary case U0 = U1 (correlation exactly 1) that
    // a Cholesky would reject; genuinely indefinite inputs are refused.
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(C);
    if (ldlt.vectorD().minCoeff() < -1e-9) {
        throw ValidationError("generate_mte_scenario: (U0, U1, V) correlation matrix is "
                              "not positive semidefinite");
    }
    Eigen::Matrix3d L = Eigen::Matrix3d(ldlt.matrixL()) *
                        ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    L = ldlt.transpositionsP().transpose() * L;

    MteTruth ledger;
    ledger.y0.resize(cfg.n);
    ledger.y1.resize(cfg.n);
    ledger.u_d.resize(cfg.n);
    ledger.ate = cfg.mte_ate;
    ledger.beta1 = cfg.mte_beta1;
    ledger.beta0 = cfg.mte_beta0;
    ledger.slope = cfg.mte_sigma1 * cfg.mte_rho1 - cfg.mte_sigma0 * cfg.mte_rho0;

    std::vector<HouseholdRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.n));
    const std::vector<std::string> covariates{"x_dem", "father_age", "y_out"};

    for (int i = 0; i < cfg.n; ++i) {
        auto rng = make_stream(cfg.seed, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> uniform(0.0, 1.0);

        const double z = uniform(rng);
        const double x = normal(rng);
        const Eigen::Vector3d raw(normal(rng), normal(rng), normal(rng));
        const Eigen::Vector3d shock = L * raw; // (U0, U1, V) on the unit scale
        const double u0 = cfg.mte_sigma0 * shock(0);
        const double u1 = cfg.mte_sigma1 * shock(1);
        const double v = shock(2);
        const double wp = std::exp(cfg.parent_wage.mu + cfg.parent_wage.sigma * normal(rng));
        const double wt = std::exp(cfg.teen_wage.mu + cfg.teen_wage.sigma * normal(rng));
        const double father_age = 35.0 + std::floor(uniform(rng) * 26.0);

        const double index = cfg.mte_takeup_const + cfg.mte_takeup_z * z + cfg.mte_takeup_x * x;
        const int d = index >= v ? 1 : 0;
        const double y0 = cfg.mte_beta0 * x + u0;
        const double y1 = cfg.mte_ate + cfg.mte_beta1 * x + u1;

        ledger.y0(i) = y0;
        ledger.y1(i) = y1;
        ledger.u_d(i) = stats::norm_cdf(v);

        HouseholdRecord r;
        r.id = "m" + std::to_string(i + 1);
        r.year = 2016;
        r.teen_gender = TeenGender::son;
        r.teen_age = 16.0;
        r.schooling = d; // treated teens study, control teens work here
        r.teen_market_hours = d == 1 ? 0.0 : cfg.m_bar_t;
        if (d == 1 && cfg.censor_student_wages) {
            r.teen_wage.reset();
        } else {
            r.teen_wage = wt;
        }
        r.teen_domestic_hours = 10.0;
        r.parent_wage = wp;
        r.parent_market_hours = 45.0;
        r.parent_domestic_hours = 15.0;
        r.nonlabor_income = 0.25;
        r.treated = d;
        r.transfer_amount = d == 1 ? cfg.transfer_amount : 0.0;
        r.instrument = z;
        r.covariates.resize(3);
        r.covariates << x, father_age, d == 1 ? y1 : y0;
        records.push_back(std::move(r));
    }

    if (truth != nullptr) *truth = std::move(ledger);
    return Dataset(std::move(records), covariates);
}

} // namespace bargainlab::sim
