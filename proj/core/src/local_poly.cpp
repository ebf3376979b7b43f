#include "bargainlab/local_poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bargainlab/errors.hpp"

namespace bargainlab::stats {

double silverman_bandwidth(const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    if (n < 2) {
        throw ValidationError("silverman_bandwidth: need at least two points");
    }
    const double mean = x.mean();
    const double sd = std::sqrt((x.array() - mean).square().sum() / double(n - 1));

    std::vector<double> sorted(x.data(), x.data() + n);
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double p) {
        const double pos = p * double(n - 1);
        const auto lo = static_cast<Eigen::Index>(std::floor(pos));
        const auto hi = std::min(lo + 1, n - 1);
        const double frac = pos - double(lo);
        return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
    };
    const double iqr = quantile(0.75) - quantile(0.25);

    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.349);
    if (spread <= 0.0) {
        throw ValidationError("silverman_bandwidth: running variable has no spread");
    }
    return 1.06 * spread * std::pow(double(n), -0.2);
}

SmoothFit local_poly_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int degree,
                         double bandwidth, const Eigen::VectorXd& grid) {
    if (x.size() != y.size()) {
        throw ValidationError("local_poly_fit: x and y lengths differ");
    }
    if (degree < 1 || degree > 3) {
        throw ValidationError("local_poly_fit: degree must be 1, 2 or 3");
    }
    if (!(bandwidth > 0.0)) {
        throw ValidationError("local_poly_fit: bandwidth must be positive");
    }
    const double xmin = x.minCoeff();
    const double xmax = x.maxCoeff();
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        if (grid(g) < xmin - 1e-12 || grid(g) > xmax + 1e-12) {
            throw ValidationError("local_poly_fit: grid point outside the data range");
        }
        if (g > 0 && !(grid(g) > grid(g - 1))) {
            throw ValidationError("local_poly_fit: grid must be strictly increasing");
        }
    }

    const int p = degree + 1;
    SmoothFit fit;
    fit.grid = grid;
    fit.value = Eigen::VectorXd::Constant(grid.size(), std::numeric_limits<double>::quiet_NaN());
    fit.deriv = Eigen::VectorXd::Constant(grid.size(), std::numeric_limits<double>::quiet_NaN());
    fit.defined.assign(static_cast<std::size_t>(grid.size()), 0);
    fit.bandwidth = bandwidth;
    fit.degree = degree;

    Eigen::MatrixXd xtx(p, p);
    Eigen::VectorXd xty(p);
    Eigen::VectorXd powers(p);

    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        xtx.setZero();
        xty.setZero();
        int effective = 0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double t = (x(i) - grid(g)) / bandwidth;
            if (std::abs(t) >= 1.0) continue;
            const double w = 0.75 * (1.0 - t * t);
            ++effective;
            powers(0) = 1.0;
            for (int j = 1; j < p; ++j) powers(j) = powers(j - 1) * (x(i) - grid(g));
            xtx.noalias() += w * (powers * powers.transpose());
            xty.noalias() += (w * y(i)) * powers;
        }
        if (effective < p) continue; // undefined marker stays

        Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
        const Eigen::VectorXd beta = ldlt.solve(xty);
        // Windows whose points are (nearly) coincident give an unusable
        // normal matrix even with enough raw points; keep those undefined.
        if (ldlt.info() != Eigen::Success || !beta.allFinite() ||
            (xtx * beta - xty).norm() > 1e-6 * (1.0 + xty.norm())) {
            continue;
        }
        fit.value(g) = beta(0);
        fit.deriv(g) = beta(1);
        fit.defined[static_cast<std::size_t>(g)] = 1;
    }
    return fit;
}

} // namespace bargainlab::stats
