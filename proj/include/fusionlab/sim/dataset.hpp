#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fusionlab/sim/scenario.hpp"
#include "fusionlab/sim/sensors.hpp"
#include "fusionlab/sim/trajectory.hpp"

namespace fusionlab::sim {

/// Raised when a dataset violates its alignment/monotonicity invariants.
class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SensorDataset {
    ScenarioConfig config;
    std::vector<GroundTruthState> truth;
    std::vector<ImuSample> imu;
    std::vector<GpsFix> gps;

    bool empty() const { return imu.empty(); }
    double start_time() const { return imu.empty() ? 0.0 : imu.front().t; }
    double end_time() const { return imu.empty() ? 0.0 : imu.back().t; }

    std::size_t valid_fix_count() const {
        return static_cast<std::size_t>(
            std::count_if(gps.begin(), gps.end(), [](const GpsFix& f) { return f.valid; }));
    }

    /// Checks stream alignment; throws DatasetError on the first violation.
    void validate() const {
        if (imu.empty()) throw DatasetError("empty sensor stream: imu");
        if (!truth.empty() && truth.size() != imu.size())
            throw DatasetError("truth and imu sample counts differ");
        for (std::size_t k = 0; k < imu.size(); ++k) {
            if (k > 0 && !(imu[k].t > imu[k - 1].t))
                throw DatasetError("non-monotonic timestamps in imu at row " + std::to_string(k));
            if (!truth.empty() && truth[k].t != imu[k].t)
                throw DatasetError("truth/imu timestamps misaligned at row " + std::to_string(k));
        }
        for (std::size_t k = 1; k < gps.size(); ++k)
            if (!(gps[k].t > gps[k - 1].t))
                throw DatasetError("non-monotonic timestamps in gps at row " + std::to_string(k));
    }

    bool operator==(const SensorDataset&) const = default;
};

/// Ground truth and both sensor streams for one scenario and noise seed.
inline SensorDataset simulate(const ScenarioConfig& config, std::uint64_t noise_seed) {
    SensorDataset d;
    d.config = config;
    d.truth = generate_ground_truth(config);
    d.imu = synthesize_imu(d.truth, config.noise, noise_seed);
    d.gps = synthesize_gps(d.truth, config.noise, config, noise_seed);
    return d;
}

inline SensorDataset simulate(const ScenarioConfig& config) { return simulate(config, config.seed); }

namespace detail {

template <class T>
std::pair<std::vector<T>, std::vector<T>> split_by_time(const std::vector<T>& v, double cut) {
    auto it = std::partition_point(v.begin(), v.end(), [cut](const T& s) { return s.t < cut; });
    return {std::vector<T>(v.begin(), it), std::vector<T>(it, v.end())};
}

inline ScenarioConfig sub_config(const ScenarioConfig& c, double start, double end) {
    ScenarioConfig out = c;
    out.start_s = start;
    out.duration_s = end - start;
    out.outage_windows.clear();
    for (const auto& w : c.outage_windows) {
        OutageWindow clipped{std::max(w.start_s, start), std::min(w.end_s, end)};
        if (clipped.end_s > clipped.start_s) out.outage_windows.push_back(clipped);
    }
    return out;
}

}  // namespace detail

/// Temporal prefix/suffix split. Samples with t < start + fraction * span go
/// to the first half; the rest to the second.
inline std::pair<SensorDataset, SensorDataset> partition(const SensorDataset& d,
                                                         double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("partition: train_fraction must lie in (0, 1)");
    if (d.imu.size() < 2) throw DatasetError("partition: need at least two samples");

    const double t0 = d.start_time();
    const double cut = t0 + train_fraction * (d.end_time() - t0);
    SensorDataset train, test;
    std::tie(train.imu, test.imu) = detail::split_by_time(d.imu, cut);
    std::tie(train.truth, test.truth) = detail::split_by_time(d.truth, cut);
    std::tie(train.gps, test.gps) = detail::split_by_time(d.gps, cut);
    if (train.imu.empty() || test.imu.empty())
        throw DatasetError("partition: split leaves an empty half");

    train.config = detail::sub_config(d.config, train.imu.front().t, train.imu.back().t);
    test.config = detail::sub_config(d.config, test.imu.front().t, test.imu.back().t);
    return {std::move(train), std::move(test)};
}

}  // namespace fusionlab::sim
