#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "bargainlab/dataset.hpp"
#include "bargainlab/household_model.hpp"
#include "bargainlab/quadrature.hpp"

namespace bargainlab::household::detail {

// One record reduced to the quantities the likelihood touches.
struct RecordTerms {
    double m = 0.0;     // parent market hours / endowment
    double lnwp = 0.0;  // ln parent wage
    double wt = 0.0;    // teen wage level
    double lnwt = 0.0;
    double ystar = 0.0; // nonlabor income + received transfer
    double dh = 0.0;    // ln(h^p/h^t) - ln(w^t/w^p), defined when has_home
    bool school = false;
    bool treated = false;
    bool has_home = false;
    Eigen::VectorXd x; // covariate block, cf residual last when used
};

struct LikContext {
    std::vector<RecordTerms> rows;
    stats::GaussHermiteRule rule;
    bool cf_used = false;
    int n_covariates = 0; // length of each x, cf residual included
};

// Validates completeness (teen wages everywhere, cf residuals all or
// none) and extracts the term table.
LikContext build_context(const Dataset& d, const LikelihoodSpec& spec);

// Parameter-level quantities hoisted out of the record loop; rebuilt once
// per likelihood evaluation, not per record.
struct CallConstants {
    double inv_sd_w = 0.0, ln_sd_w = 0.0;
    double inv_sd_s = 0.0, ln_sd_s = 0.0;
    double inv_sd_h = 0.0, ln_sd_h = 0.0;
    double c_t = 0.0;
    double ln_alpha_ratio = 0.0;
    bool valid = false;   // all scale parameters positive, alpha in (0,1)
    bool sd_h_ok = false; // sigma_h positive (only needed with home hours)
    Eigen::ArrayXd lw;    // log quadrature weights
    Eigen::ArrayXd ct_e;  // c_t * nodes (participation shifter)
    Eigen::ArrayXd ch_e;  // c_h * nodes (home-ratio shifter)
    Eigen::ArrayXd cw_e;  // work-regime loading * nodes
    Eigen::ArrayXd cs_e;  // school-regime loading * nodes
};

CallConstants make_call_constants(const ModelParams& p,
                                  const stats::GaussHermiteRule& rule);

double record_loglik(const ModelParams& p, const RecordTerms& t,
                     const CallConstants& cc);

// Fixed-order sum of record contributions. Any record at -inf drives the
// total to -inf (the line search then rejects the step); the counter
// reports how many degenerated.
double total_loglik(const ModelParams& p, const LikContext& ctx, std::size_t* nonfinite);

} // namespace bargainlab::household::detail
