#include "bargainlab/home_production.hpp"

#include <cmath>

#include "bargainlab/errors.hpp"

namespace bargainlab::household {

AlphaFit estimate_alpha(const Dataset& d) {
    double sum = 0.0, sumsq = 0.0;
    int n = 0;
    for (const auto& r : d.records()) {
        if (r.parent_domestic_hours <= 0.0 || r.teen_domestic_hours <= 0.0 ||
            !r.teen_wage.has_value()) {
            continue;
        }
        const double diff = std::log(r.parent_domestic_hours / r.teen_domestic_hours) -
                            std::log(*r.teen_wage / r.parent_wage);
        sum += diff;
        sumsq += diff * diff;
        ++n;
    }
    if (n == 0) {
        throw ValidationError(
            "estimate_alpha: no household has both domestic inputs and a teen wage");
    }

    AlphaFit out;
    out.n = n;
    out.c = sum / n;
    if (!std::isfinite(out.c)) {
        throw EstimationError("estimate_alpha: non-finite log-ratio mean");
    }
    const double var = n > 1 ? (sumsq - n * out.c * out.c) / (n - 1.0) : 0.0;
    out.c_se = std::sqrt(std::max(0.0, var) / n);
    out.alpha = 1.0 / (1.0 + std::exp(-out.c));
    out.se = out.alpha * (1.0 - out.alpha) * out.c_se;
    return out;
}

} // namespace bargainlab::household
