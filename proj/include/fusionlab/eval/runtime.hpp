#pragma once

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <vector>

#include "fusionlab/eval/methods.hpp"

namespace fusionlab::eval {

inline constexpr double kRealTimeBudgetMs = 10.0;

struct RuntimeResult {
    Method method = Method::ManualUKF;
    double ms_per_update = 0.0;         // median over repetitions
    std::vector<double> repetitions_ms; // per-update time of each repetition
    std::size_t cycles = 0;             // predict + correct cycles per pass

    bool passes(double budget_ms = kRealTimeBudgetMs) const { return ms_per_update < budget_ms; }
};

/// Median wall-clock time per predict/correct cycle over `repetitions`
/// passes after one untimed warm-up pass. Call from a single thread.
inline RuntimeResult benchmark_runtime(Method m, const sim::SensorDataset& d, const MethodParams& p,
                                       int repetitions) {
    if (repetitions < 3) throw std::invalid_argument("benchmark_runtime: repetitions must be >= 3");
    if (d.imu.size() < 2) throw std::invalid_argument("benchmark_runtime: dataset too short");
    RuntimeResult r;
    r.method = m;
    r.cycles = d.imu.size() - 1;
    volatile double sink = run_method(m, d, p).estimates.back().mean(0);
    for (int k = 0; k < repetitions; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto run = run_method(m, d, p);
        const auto t1 = std::chrono::steady_clock::now();
        sink = run.estimates.back().mean(0);
        r.repetitions_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count() /
                                   static_cast<double>(r.cycles));
    }
    (void)sink;
    std::vector<double> sorted = r.repetitions_ms;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    r.ms_per_update = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return r;
}

}  // namespace fusionlab::eval
