#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bargainlab/dataset.hpp"
#include "bargainlab/fit_result.hpp"
#include "bargainlab/propensity.hpp"

namespace bargainlab::mte {

enum class MteMethod { parametric_deg1, semiparametric_deg2 };

std::string to_string(MteMethod m);
MteMethod mte_method_from_string(const std::string& s);

struct MteSpec {
    std::string outcome;
    std::vector<std::string> covariates; // outcome-equation X, instrument excluded
    double bandwidth = 0.0; // m-step smooth; 0: derivative rule on in-arm scores
};

// MTE(xbar, u) on a grid of resistance quantiles. The observed part and
// the u-varying polynomial coefficients carry their own covariances so
// the heterogeneity tests can run off a stored curve.
struct MteCurve {
    Eigen::VectorXd u_grid;
    Eigen::VectorXd mte;
    Eigen::VectorXd se;      // analytic for parametric, else bootstrap-filled
    Eigen::VectorXd band_lo; // 95% bootstrap band, NaN until mte_bootstrap
    Eigen::VectorXd band_hi;
    std::vector<std::uint8_t> defined;

    stats::FitResult observed_diff; // beta1 - beta0 over covariates, no intercept
    double xbar_level = 0.0;        // xbar'(beta1 - beta0), intercept included
    double unobs_const = 0.0;       // constant of the u-polynomial (parametric only)
    Eigen::VectorXd unobs_coef;     // coefficients on u, u^2, ... in MTE(u)
    Eigen::MatrixXd unobs_cov;

    double support_lo = 0.0;
    double support_hi = 1.0;
    double share_in_support = 1.0;
    MteMethod method = MteMethod::parametric_deg1;
};

// Separate-approach MTE: E[Y|X,p,D=d] = X b_d + K_d(p) fitted per arm on
// the common support, then MTE(u) = xbar'(b1-b0) + d/du[u K1(u)] +
// d/du[(1-u) K0(u)] evaluated at pooled covariate means. An empty u_grid
// requests the default 0.01-step grid over the support.
MteCurve mte_separate(const Dataset& d, const PropensityFit& fit, const MteSpec& spec,
                      MteMethod method, const Eigen::VectorXd& u_grid = {});

// Household bootstrap with the propensity score re-estimated inside each
// replication; fills se and the 95% percentile band on the base grid.
MteCurve mte_bootstrap(const Dataset& d, const PropensitySpec& pspec, const MteSpec& spec,
                       MteMethod method, int B, std::uint64_t seed,
                       const Eigen::VectorXd& u_grid = {});

struct HeterogeneityTests {
    double stat_observable = 0.0;
    int df_observable = 0;
    double p_observable = 1.0;
    double stat_unobservable = 0.0;
    int df_unobservable = 0;
    double p_unobservable = 1.0;
};

// Wald tests: observables = all covariate differences zero; unobservables
// = all u-varying MTE coefficients zero. Arm samples are disjoint, so the
// joint covariance is block diagonal by construction.
HeterogeneityTests heterogeneity_tests(const MteCurve& curve);

} // namespace bargainlab::mte
