#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bargainlab/dataset.hpp"
#include "bargainlab/fit_result.hpp"
#include "bargainlab/optimize.hpp"
#include "bargainlab/quadrature.hpp"

namespace bargainlab::household {

enum class ModelKind { unrestricted, unitary, collective };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

// Constraints imposed on the switching system: 4 for unitary, 2 for
// collective, 0 otherwise.
int constraint_count(ModelKind k);

// One point of the switching system. With M = parent market hours over
// the time endowment, w^t the teen wage in levels, y* nonlabor income
// plus the received transfer, and X the covariate block (the control
// function residual rides along as a covariate when used):
//   work regime    M = const_w + Ap_star ln w^p + At w^t + Ay y*
//                      + delta ln w^t + beta_w'X + u_w
//   school regime  M = const_s + ap_star ln w^p + at w^t + ay y*
//                      + delta ln w^t + beta_s'X + u_s
//   schooling      s = 1{ b0 + bt w^t + bp ln w^p + by y* + beta_t'X + u_t >= 0 }
//   home inputs    ln(h^p/h^t) = ln(alpha/(1-alpha)) + ln(w^t/w^p) + u_h
// Errors share one household factor: u_j = chi_j eta + eps_j with
// eta ~ N(0, sigma_eta^2). Scale is pinned by chi_w = 1 and sd(eps_t) = 1;
// sigma_w, sigma_s, sigma_h are the idiosyncratic scales of the other
// equations.
struct ModelParams {
    double const_w = 0.0;
    double Ap_star = 0.0;
    double At = 0.0;
    double Ay = 0.0;
    double const_s = 0.0;
    double ap_star = 0.0;
    double at = 0.0;
    double ay = 0.0;
    double delta = 0.0;
    double b0 = 0.0;
    double bt = 0.0;
    double bp = 0.0;
    double by = 0.0;
    Eigen::VectorXd beta_w;
    Eigen::VectorXd beta_s;
    Eigen::VectorXd beta_t;
    double alpha = 0.5;
    double sigma_eta = 0.0;
    double chi_s = 0.0;
    double chi_t = 0.0;
    double chi_h = 0.0;
    double sigma_w = 1.0;
    double sigma_s = 1.0;
    double sigma_h = 1.0;
};

struct LikelihoodSpec {
    std::vector<std::string> covariates;
    // Append cf_residual to the covariate block when the records carry
    // one (all or none; a mix is an error).
    bool use_cf_residual = true;
    double endowment = 98.0; // weekly hours; M = hours / endowment
    int nodes = 16;          // Gauss-Hermite nodes for the factor
};

// Log of one household's likelihood contribution: the factor eta is
// integrated with the supplied rule; conditional on eta the record
// contributes its regime density, the schooling probability (untreated
// households only), and the home-input ratio density when both domestic
// hours are positive. Returns -inf when a density degenerates.
double household_loglik(const ModelParams& p, const HouseholdRecord& rec,
                        const LikelihoodSpec& spec, const stats::GaussHermiteRule& rule);

// Residuals of the restrictions the fit is supposed to satisfy: the four
// unitary ones or the two collective ones, empty for unrestricted. The
// frontier ratios gamma_p = -bp/bt and gamma_y = -by/bt come from the
// schooling block of the same parameter point.
Eigen::VectorXd constraint_residuals(const ModelParams& p, ModelKind kind);

struct ReducedFormEstimates {
    ModelKind kind = ModelKind::unrestricted;
    ModelParams params;
    // Optimizer-space estimates (free parameterization of the kind).
    stats::FitResult free_fit;
    // The canonical reduced block shared by every kind, with a
    // delta-method covariance: Ap_star, At, Ay, ap_star, at, ay, delta,
    // b0, bt, bp, by.
    std::vector<std::string> reduced_names;
    Eigen::VectorXd reduced;
    Eigen::MatrixXd cov_reduced;
    double loglik = 0.0;
    int n = 0;
    bool cf_used = false;
    std::size_t nonfinite_records = 0; // records at -inf at the optimum
    bool converged = false;
    std::vector<std::string> warnings;
};

struct FitOptions {
    ModelKind kind = ModelKind::unrestricted;
    // Home-production share. Empty means the two-step route: estimate it
    // from the home-hours ratio first and hold it fixed in the likelihood.
    // A value pins it instead, and joint_alpha estimates it inside the
    // likelihood (alpha then only seeds the start).
    std::optional<double> alpha;
    bool joint_alpha = false;
    LikelihoodSpec lik;
    stats::MaximizeOptions optimize;
    // Optional explicit start replacing the data-driven warm start; its
    // beta vectors must match the covariate block of `lik`.
    std::optional<ModelParams> start;
};

ReducedFormEstimates fit_model(const Dataset& d, const FitOptions& opt);

struct LrResult {
    double stat = 0.0;
    int df = 0;
    double p = 1.0;
};

// Likelihood ratio of a nested pair; df defaults to the difference in
// imposed constraint counts.
LrResult lr_test(const ReducedFormEstimates& restricted,
                 const ReducedFormEstimates& unrestricted, int df = -1);

struct ReservationWages {
    double gamma_p = 0.0;
    double gamma_y = 0.0;
    double se_gamma_p = 0.0;
    double se_gamma_y = 0.0;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};

// Frontier slopes gamma_p = -bp/bt, gamma_y = -by/bt with delta-method
// SEs; cov_b is the covariance of (bt, bp, by) in that order.
ReservationWages reservation_wage(double bt, double bp, double by,
                                  const Eigen::Matrix3d& cov_b);
ReservationWages reservation_wage(const ReducedFormEstimates& est);

// Sharing-rule block recovered from a collective fit. F_prime is the
// teen's marginal share retained in the schooling regime; psi_* are the
// derivatives of the parent's share with respect to ln w^p, w^t, y*;
// theta_p_rho and theta_p_w are the parent labor-supply responses. The
// level constants kappa of the sharing function are identified only up
// to location and are never reported.
struct StructuralParams {
    double alpha = 0.0;
    double gamma_p = 0.0;
    double gamma_y = 0.0;
    double F_prime = 0.0;
    double psi_p = 0.0;
    double psi_t = 0.0;
    double psi_y = 0.0;
    double theta_p_rho = 0.0;
    double theta_p_w = 0.0;
    // Work-regime coefficients completed through the collective
    // restrictions from the school-regime block.
    double At_completed = 0.0;
    double Ap_star_completed = 0.0;
    double other_root = 0.0; // rejected root of the F' quadratic
    bool has_ses = false;
    double se_F_prime = 0.0;
    double se_psi_p = 0.0;
    double se_psi_t = 0.0;
    double se_psi_y = 0.0;
    double se_theta_p_rho = 0.0;
    double se_theta_p_w = 0.0;
    double se_gamma_p = 0.0;
    double se_gamma_y = 0.0;
};

// Point recovery from the school-regime coefficients, the work-regime
// income response, and the frontier slopes. No SEs; theta_p_w needs the
// wage block and stays at zero here.
StructuralParams recover_sharing_rule(double at, double ay, double Ay, double gamma_p,
                                      double gamma_y);

// Full chain from a collective fit, with delta-method SEs propagated
// through gamma, the quadratic for F', the psi block, and the theta
// substitutions.
StructuralParams recover_sharing_rule(const ReducedFormEstimates& est);

struct BatteryReport {
    ReducedFormEstimates unrestricted;
    ReducedFormEstimates unitary;
    ReducedFormEstimates collective;
    bool has_unrestricted = false;
    bool has_unitary = false;
    bool has_collective = false;
    LrResult lr_unitary;
    LrResult lr_collective;
    ReservationWages reservation;
    std::string reservation_source; // kind the reservation block came from
    bool sharing_ok = false;
    StructuralParams sharing;
    std::string verdict;
    std::vector<std::string> notes; // stage failures, in order
};

// Fits all three kinds, runs both likelihood-ratio tests at the 5% level,
// recovers reservation wages and, when the collective restrictions
// survive, the sharing rule. Stage failures are recorded instead of
// thrown; opt.kind is ignored.
BatteryReport test_battery(const Dataset& d, const FitOptions& opt);

} // namespace bargainlab::household
