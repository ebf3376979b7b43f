#include "bargainlab/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "bargainlab/errors.hpp"
#include "bargainlab/rng.hpp"

namespace bargainlab::stats {

double percentile(std::vector<double> values, double p) {
    if (values.empty()) {
        throw ValidationError("percentile: no values");
    }
    std::sort(values.begin(), values.end());
    const double pos = p * double(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - double(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

BootstrapResult bootstrap(const DatasetStatistic& estimator, const Dataset& d, int B,
                          std::uint64_t seed, const BootstrapOptions& opts) {
    if (B < 2) {
        throw ValidationError("bootstrap: need at least 2 replications");
    }
    if (d.size() == 0) {
        throw ValidationError("bootstrap: empty dataset");
    }

    const auto n = static_cast<Eigen::Index>(d.size());
    std::vector<Eigen::VectorXd> results(static_cast<std::size_t>(B));
    std::vector<std::uint8_t> ok(static_cast<std::size_t>(B), 0);
    std::vector<std::string> messages;
    std::mutex message_mutex;

    std::atomic<int> next{0};
    auto work = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= B) return;
            auto rng = make_stream(seed, static_cast<std::uint64_t>(r));
            std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
            std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
            for (auto& ix : rows) ix = pick(rng);
            try {
                results[static_cast<std::size_t>(r)] = estimator(d.resampled(rows));
                ok[static_cast<std::size_t>(r)] = 1;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(message_mutex);
                if (messages.size() < 5 &&
                    std::find(messages.begin(), messages.end(), e.what()) == messages.end()) {
                    messages.emplace_back(e.what());
                }
            }
        }
    };

    const int workers = std::max(1, opts.workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    BootstrapResult out;
    out.requested = B;
    out.failure_messages = std::move(messages);
    int good = 0;
    for (auto flag : ok) good += flag;
    out.failed = B - good;
    if (out.failed * 5 > B) {
        std::string detail;
        for (const auto& m : out.failure_messages) detail += "\n  " + m;
        throw EstimationError("bootstrap: " + std::to_string(out.failed) + " of " +
                              std::to_string(B) + " replications failed (limit 20%)" + detail);
    }

    Eigen::Index k = -1;
    for (int r = 0; r < B; ++r) {
        if (ok[static_cast<std::size_t>(r)]) {
            k = results[static_cast<std::size_t>(r)].size();
            break;
        }
    }
    out.draws.resize(good, k);
    Eigen::Index row = 0;
    for (int r = 0; r < B; ++r) {
        if (!ok[static_cast<std::size_t>(r)]) continue;
        if (results[static_cast<std::size_t>(r)].size() != k) {
            throw EstimationError("bootstrap: estimator returned inconsistent statistic lengths");
        }
        out.draws.row(row++) = results[static_cast<std::size_t>(r)].transpose();
    }

    out.se.resize(k);
    out.ci.resize(k, 2);
    const double tail = 0.5 * (1.0 - opts.level);
    for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::VectorXd col = out.draws.col(j);
        const double mean = col.mean();
        out.se(j) = good > 1
                        ? std::sqrt((col.array() - mean).square().sum() / double(good - 1))
                        : 0.0;
        std::vector<double> vals(col.data(), col.data() + col.size());
        out.ci(j, 0) = percentile(vals, tail);
        out.ci(j, 1) = percentile(std::move(vals), 1.0 - tail);
    }
    return out;
}

} // namespace bargainlab::stats
