#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bargainlab/dataset.hpp"

namespace bargainlab::stats {

using DatasetStatistic = std::function<Eigen::VectorXd(const Dataset&)>;

struct BootstrapOptions {
    int workers = 1;     // worker threads; results are worker-count invariant
    double level = 0.95; // percentile interval coverage
};

struct BootstrapResult {
    Eigen::MatrixXd draws; // successful replications (rows), statistics (cols)
    Eigen::VectorXd se;    // column standard deviations, ddof 1
    Eigen::MatrixXd ci;    // k x 2 percentile interval bounds
    int requested = 0;
    int failed = 0;
    std::vector<std::string> failure_messages; // first few, deduplicated
};

// Household-level resampling with replacement. Replication r draws its
// indices from an RNG stream derived from (seed, r), so the output is
// identical no matter how replications are scheduled across workers.
// Estimator failures are tolerated up to 20% of B; beyond that the whole
// bootstrap aborts with the collected diagnostics.
BootstrapResult bootstrap(const DatasetStatistic& estimator, const Dataset& d, int B,
                          std::uint64_t seed, const BootstrapOptions& opts = {});

// Percentile of sorted draws with linear interpolation (used for the CI).
double percentile(std::vector<double> values, double p);

} // namespace bargainlab::stats
