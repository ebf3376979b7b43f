#include "bargainlab/propensity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "bargainlab/distributions.hpp"
#include "bargainlab/errors.hpp"
#include "bargainlab/probit.hpp"

namespace bargainlab::mte {

PropensityFit estimate_propensity(const Dataset& d, const PropensitySpec& spec) {
    std::vector<std::string> columns = spec.covariates;
    columns.push_back(spec.instrument);
    std::vector<std::string> names;
    const Eigen::MatrixXd X = design_matrix(d, columns, all_rows(d), true, &names);
    const Eigen::VectorXd treated = d.column("treated");

    PropensityFit out;
    out.instrument_name = spec.instrument;
    out.probit = stats::probit_fit(X, treated, names);

    const double t =
        out.probit.coef_of(spec.instrument) / out.probit.se_of(spec.instrument);
    if (std::abs(t) < stats::norm_quantile(0.975)) {
        out.weak_instrument = true;
        std::ostringstream msg;
        msg << "weak instrument: first-stage |t| = " << std::abs(t)
            << " for " << spec.instrument;
        out.probit.warnings.push_back(msg.str());
    }

    const Eigen::VectorXd z = X * out.probit.coef;
    out.scores.resize(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        // Keep scores strictly interior; Phi underflows to 0/1 for |z|
        // beyond the erfc range and downstream code divides by p(1-p).
        out.scores(i) = std::clamp(stats::norm_cdf(z(i)), 1e-12, 1.0 - 1e-12);
    }
    return out;
}

CommonSupport common_support(const PropensityFit& fit, const Eigen::VectorXd& treated) {
    const Eigen::Index n = fit.scores.size();
    if (treated.size() != n) {
        throw ValidationError("common_support: score and treatment lengths differ");
    }

    constexpr int kCells = 100;
    std::array<int, kCells> count1{};
    std::array<int, kCells> count0{};
    double min1 = std::numeric_limits<double>::infinity();
    double max1 = -min1;
    double min0 = min1;
    double max0 = -min1;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = fit.scores(i);
        const int cell = std::min(kCells - 1, static_cast<int>(p * kCells));
        if (treated(i) > 0.5) {
            ++count1[static_cast<std::size_t>(cell)];
            min1 = std::min(min1, p);
            max1 = std::max(max1, p);
        } else {
            ++count0[static_cast<std::size_t>(cell)];
            min0 = std::min(min0, p);
            max0 = std::max(max0, p);
        }
    }
    if (max1 < min1 || max0 < min0) {
        throw ValidationError("common_support: need at least one treated and one "
                              "untreated unit");
    }

    const double lo_range = std::max(min1, min0);
    const double hi_range = std::min(max1, max0);
    int first = -1;
    int last = -1;
    for (int c = 0; c < kCells; ++c) {
        if (count1[static_cast<std::size_t>(c)] > 0 &&
            count0[static_cast<std::size_t>(c)] > 0) {
            if (first < 0) first = c;
            last = c;
        }
    }
    if (first < 0 || lo_range > hi_range) {
        throw EstimationError(
            "common_support: no common support (no 0.01 score cell contains both "
            "treated and untreated units)");
    }

    CommonSupport cs;
    cs.lo = std::max(first / static_cast<double>(kCells), lo_range);
    cs.hi = std::min((last + 1) / static_cast<double>(kCells), hi_range);
    if (cs.lo > cs.hi) {
        throw EstimationError("common_support: trimmed support is empty");
    }
    Eigen::Index kept = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = fit.scores(i);
        if (p >= cs.lo && p <= cs.hi) ++kept;
    }
    cs.share_retained = static_cast<double>(kept) / static_cast<double>(n);
    return cs;
}

} // namespace bargainlab::mte
