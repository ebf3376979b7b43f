#pragma once

#include "bargainlab/dataset.hpp"

namespace bargainlab::household {

// Cobb-Douglas exponent of the parent's domestic time, from the
// first-order condition of cost-minimal home production: regressing
// ln(h^p/h^t) - ln(w^t/w^p) on a constant gives c = ln(alpha/(1-alpha)).
struct AlphaFit {
    double c = 0.0;
    double c_se = 0.0;
    double alpha = 0.5;
    double se = 0.0;
    int n = 0; // households with both domestic inputs and a teen wage
};

AlphaFit estimate_alpha(const Dataset& d);

} // namespace bargainlab::household
