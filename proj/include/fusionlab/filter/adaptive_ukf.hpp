#pragma once

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <vector>

#include "fusionlab/filter/ukf.hpp"

namespace fusionlab::filter {

struct AdaptiveConfig {
    std::size_t window = 10;  // GPS updates in the moving average
    double floor = 1e-5;
};

struct AdaptiveRun {
    FilterRun run;
    std::vector<MeasVector> r_history;  // measurement noise used at each update
};

/// Innovation-based measurement-noise estimate: the window mean of the
/// squared innovations minus the predicted measurement variance, per axis,
/// floored.
class InnovationWindow {
public:
    explicit InnovationWindow(AdaptiveConfig cfg) : cfg_(cfg) {
        if (cfg_.window == 0) throw std::invalid_argument("adaptive window must be > 0");
    }

    void push(const InnovationStats& s) {
        samples_.push_back(s);
        if (samples_.size() > cfg_.window) samples_.pop_front();
    }

    bool ready() const { return samples_.size() == cfg_.window; }

    MeasVector estimate() const {
        MeasVector acc = MeasVector::Zero();
        for (const auto& s : samples_)
            acc += s.innovation.cwiseProduct(s.innovation) - s.predicted_cov.diagonal();
        acc /= static_cast<double>(samples_.size());
        return acc.cwiseMax(cfg_.floor);
    }

private:
    AdaptiveConfig cfg_;
    std::deque<InnovationStats> samples_;
};

/// UKF whose measurement noise follows the innovation window once it is
/// full; before that base_params.r_diag is used.
inline AdaptiveRun run_adaptive_ukf(const sim::SensorDataset& d, const StateEstimate& init,
                                    const FilterParams& base_params, AdaptiveConfig cfg = {}) {
    base_params.validate();
    const UnscentedWeights w(base_params);
    InnovationWindow window(cfg);
    AdaptiveRun out;
    MeasVector r = base_params.r_diag;
    StateEstimate start = init;
    StateMatrix chol = condition_spd(start.cov, start.t);
    out.run = run_multirate(
        d, start,
        [&](const StateEstimate& s, const ImuInput& u, double dt) {
            return detail::unscented_predict(s, chol, u, dt, base_params, w);
        },
        [&](const StateEstimate& s, const sim::GpsFix& f) {
            InnovationStats stats;
            out.r_history.push_back(r);
            auto next = detail::unscented_update(s, chol, MeasVector(f.x, f.y), r, w, &stats);
            window.push(stats);
            if (window.ready()) r = window.estimate();
            return next;
        });
    return out;
}

}  // namespace fusionlab::filter
