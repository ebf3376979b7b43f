#pragma once

#include <cmath>

namespace bargainlab::stats {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779;
inline constexpr double kInvSqrt2 = 0.7071067811865475244;

inline double norm_pdf(double z) {
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

inline double log_norm_pdf(double z) {
    return -0.9189385332046727418 - 0.5 * z * z;
}

inline double norm_cdf(double z) {
    return 0.5 * std::erfc(-z * kInvSqrt2);
}

// Survival function 1 - Phi(z), accurate in the upper tail.
inline double norm_sf(double z) {
    return 0.5 * std::erfc(z * kInvSqrt2);
}

// Log Phi(z) without underflow; for z below the erfc range use the
// standard tail expansion log Phi(z) ~ log phi(z) - log(-z).
inline double log_norm_cdf(double z) {
    if (z > -30.0) {
        return std::log(norm_cdf(z));
    }
    return log_norm_pdf(z) - std::log(-z) + std::log1p(-1.0 / (z * z));
}

// Inverse Mills ratio phi(z)/Phi(z), stable far into the left tail where
// Phi underflows. The asymptotic branch uses lambda(z) ~ -z - 1/z + 2/z^3.
inline double inv_mills(double z) {
    if (z > -30.0) {
        return norm_pdf(z) / norm_cdf(z);
    }
    return -z - 1.0 / z + 2.0 / (z * z * z);
}

// Quantile of the standard normal; errors on p outside (0,1).
double norm_quantile(double p);

// Upper tail P(X > x) of a chi-squared variable with df degrees of freedom.
double chi2_sf(double x, int df);

} // namespace bargainlab::stats
