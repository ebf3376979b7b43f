#include "bargainlab/distributions.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "bargainlab/errors.hpp"

namespace bargainlab::stats {

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ValidationError("norm_quantile: p must lie strictly in (0,1)");
    }
    static const boost::math::normal_distribution<double> snd(0.0, 1.0);
    return boost::math::quantile(snd, p);
}

double chi2_sf(double x, int df) {
    if (df < 1) {
        throw ValidationError("chi2_sf: degrees of freedom must be >= 1");
    }
    if (x <= 0.0) {
        return 1.0;
    }
    boost::math::chi_squared_distribution<double> dist(static_cast<double>(df));
    return boost::math::cdf(boost::math::complement(dist, x));
}

} // namespace bargainlab::stats
