#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace bargainlab::stats {

// Kernel-weighted polynomial fit evaluated on a grid. value/deriv hold
// NaN where the window had too few points; `defined` marks usable entries.
struct SmoothFit {
    Eigen::VectorXd grid;
    Eigen::VectorXd value;
    Eigen::VectorXd deriv;
    std::vector<std::uint8_t> defined;
    double bandwidth = 0.0;
    std::string kernel = "epanechnikov";
    int degree = 0;
};

// Local polynomial regression with the Epanechnikov kernel. At each grid
// point g it fits y on powers of (x - g) with weights K((x-g)/h); the
// intercept is the smoothed value, the linear coefficient the derivative.
// degree must be 1..3 and the grid must lie within the range of x.
SmoothFit local_poly_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int degree,
                         double bandwidth, const Eigen::VectorXd& grid);

// Silverman's rule of thumb 1.06 min(sd, iqr/1.349) n^(-1/5).
double silverman_bandwidth(const Eigen::VectorXd& x);

} // namespace bargainlab::stats
