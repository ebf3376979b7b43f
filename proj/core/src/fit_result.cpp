#include "bargainlab/fit_result.hpp"

#include <cmath>

#include "bargainlab/errors.hpp"

namespace bargainlab::stats {

double FitResult::se(Eigen::Index k) const {
    double v = cov(k, k);
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

Eigen::Index FitResult::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<Eigen::Index>(i);
    }
    throw ValidationError("FitResult: no coefficient named '" + name + "'");
}

double FitResult::coef_of(const std::string& name) const {
    return coef(index_of(name));
}

double FitResult::se_of(const std::string& name) const {
    return se(index_of(name));
}

bool FitResult::has(const std::string& name) const {
    for (const auto& n : names) {
        if (n == name) return true;
    }
    return false;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

} // namespace bargainlab::stats
