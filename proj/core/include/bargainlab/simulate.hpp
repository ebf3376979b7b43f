#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bargainlab/dataset.hpp"

namespace bargainlab::sim {

enum class TruthKind { unitary, collective, mte_scenario };

std::string to_string(TruthKind k);
TruthKind truth_kind_from_string(const std::string& s);

struct LognormalSpec {
    double mu = 0.0;    // log-scale location
    double sigma = 1.0; // log-scale spread
};

// Complete description of a synthetic population. Collective truths are
// parameterized by the structural block (theta, psi, alpha); unitary
// truths by the composite block; the mte block drives the potential-
// outcome scenario. Monetary amounts are scaled so the implied regime
// coefficients land near the magnitudes seen in survey estimates.
struct SimConfig {
    int n = 2000;
    std::uint64_t seed = 1;
    TruthKind truth_kind = TruthKind::collective;

    // Technology and preferences.
    double alpha = 0.8;          // parent share in home production
    double theta_p_w = -10.0;    // parent own-wage response
    double theta_p_rho = -6.0;   // parent share response
    double theta_t_rho = 0.821;  // F': teen share retained when studying
    double theta_p_K = 1.5;      // home-production price response
    double theta_t_K = 0.9;      // teen analogue, ledger only

    // Sharing-rule derivatives (collective truth).
    double psi_p = 1.796;
    double psi_t = 1.146;
    double psi_y = 2.19;
    double kappa_work = 0.0;   // share level constants, ledger only
    double kappa_school = 0.1;

    // Unitary composites.
    double uni_A_p_star = 5.5;
    double uni_A_com = 5.0;
    double uni_delta = 0.3;
    double uni_gamma_p = 0.405;
    double uni_gamma_y = 0.493;

    // Reservation-wage frontier: latent scale and intercept; slope
    // coefficients follow from the frontier ratios.
    double frontier_b0 = 4.1;
    double frontier_bt = -4.0;

    // Regime intercepts and the covariate loadings of x_dem.
    double work_const = 38.0;
    double school_const = 30.0;
    double beta_x_work = 0.3;
    double beta_x_school = 0.2;
    double beta_x_latent = 0.25;

    // Market draws.
    LognormalSpec parent_wage{0.4782, 0.4436};
    LognormalSpec teen_wage{0.1321, 0.4453};
    LognormalSpec nonlabor{-1.48754, 0.45};

    // Error scales. chi_* load the household factor eta; sigma_t = 1 and
    // chi_w = 1 match the estimator's normalization.
    double sigma_eta = 1.0;
    double chi_w = 1.0;
    double chi_s = 0.8;
    double chi_t = 0.5;
    double chi_h = 0.3;
    double sigma_w = 2.0;
    double sigma_s = 2.0;
    double sigma_t = 1.0;
    double sigma_h = 0.4;

    // Transfer rule and take-up.
    double transfer_amount = 0.035; // y_A
    double takeup_const = -1.6;
    double takeup_x = 0.2;
    double takeup_z = 2.0; // instrument loading

    // Time endowment and fixed teen market hours. The endowment matches
    // the likelihood's default hours normalization.
    double time_endowment = 98.0;
    double school_time = 40.0; // S
    double m_bar_t = 40.0;

    // Home production level: fbar = fbar0 + fbar_y * y_star.
    double fbar0 = 0.02;
    double fbar_y = 0.1;

    // Emit missing teen wages for students (exercises the imputation
    // path); off by default so estimators see potential wages directly.
    bool censor_student_wages = false;

    // Potential-outcome scenario block.
    double mte_ate = 0.4;
    double mte_beta1 = 0.6;
    double mte_beta0 = 0.3;
    double mte_sigma1 = 1.0;
    double mte_sigma0 = 1.0;
    double mte_rho1 = 0.25;  // corr(U1, V)
    double mte_rho0 = -0.25; // corr(U0, V)
    double mte_rho01 = 0.8;  // corr(U0, U1)
    double mte_takeup_const = -1.0;
    double mte_takeup_x = 0.3;
    double mte_takeup_z = 2.0;
};

// Oracle ledger for the household truths; holds everything estimators
// are never shown.
struct SimTruth {
    std::map<std::string, double> reduced; // implied regime coefficients
    Eigen::VectorXd share_parent;          // rho^p
    Eigen::VectorXd share_teen;            // rho^t
    Eigen::VectorXd public_spend;          // g_K * fbar
    Eigen::VectorXd y_star;
    Eigen::VectorXd latent_school;
    Eigen::VectorXd eta;
    std::vector<std::uint8_t> takeup;      // T, before conditionality
};

// Oracle ledger for the potential-outcome scenario.
struct MteTruth {
    Eigen::VectorXd y0;
    Eigen::VectorXd y1;
    Eigen::VectorXd u_d;
    double ate = 0.0;    // intercept difference
    double beta1 = 0.0;
    double beta0 = 0.0;
    double slope = 0.0;  // coefficient on the inverse-normal quantile

    // True MTE at covariate value x and resistance quantile u.
    double mte_at(double u, double x = 0.0) const;
};

Dataset generate(const SimConfig& cfg, SimTruth* truth = nullptr);
Dataset generate_mte_scenario(const SimConfig& cfg, MteTruth* truth = nullptr);

} // namespace bargainlab::sim
