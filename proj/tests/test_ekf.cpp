#include <gtest/gtest.h>

#include <random>

#include "fusionlab/eval/metrics.hpp"
#include "fusionlab/filter/ekf.hpp"
#include "fusionlab/filter/ukf.hpp"

using namespace fusionlab;
using namespace fusionlab::filter;

namespace {

StateMatrix numeric_jacobian(const StateVector& x, const ImuInput& u, double dt) {
    const double h = 1e-6;
    StateMatrix j;
    for (int i = 0; i < kStateDim; ++i) {
        StateVector hi = x, lo = x;
        hi(i) += h;
        lo(i) -= h;
        j.col(i) = (propagate(hi, u, dt) - propagate(lo, u, dt)) / (2.0 * h);
    }
    return j;
}

}  // namespace

TEST(EkfJacobian, MatchesFiniteDifferences) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> pos(-500.0, 500.0), vel(-30.0, 30.0), head(-kPi, kPi),
        acc(-5.0, 5.0), rate(-1.0, 1.0), step(0.005, 0.2);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        StateVector x;
        x << pos(rng), pos(rng), vel(rng), vel(rng), head(rng);
        const ImuInput u{acc(rng), acc(rng), rate(rng)};
        const double dt = step(rng);
        worst = std::max(worst, (propagate_jacobian(x, u, dt) - numeric_jacobian(x, u, dt)).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(EkfJacobian, MeasurementSelectsPosition) {
    const auto h = measure_jacobian();
    StateVector x;
    x << 1.0, 2.0, 3.0, 4.0, 5.0;
    EXPECT_EQ(h * x, measure(x));
}

TEST(Ekf, AgreesWithUkfOnLinearSegment) {
    auto c = sim::make_scenario(sim::Maneuver::StraightCruise500m, sim::Environment::Clear, 50.0, 3);
    c.profile.initial_heading = 0.8;
    c.noise = sim::NoiseProfile::zero();
    c.noise.gps_sigma = 1.5;
    const auto d = sim::simulate(c, 2);
    const auto p = FilterParams::manual_default();
    const auto init = truth_estimate(d.truth.front(), 1.0);
    const auto ukf = run_filter(p, d, init);
    const auto ekf = run_ekf(d, p.q_diag, p.r_diag, init);
    double worst = 0.0;
    for (std::size_t k = 0; k < d.imu.size(); ++k)
        worst = std::max(worst, (ukf.estimates[k].mean.head<2>() - ekf.estimates[k].mean.head<2>()).norm());
    EXPECT_LT(worst, 1e-6);
}

TEST(Ekf, NoiselessTracksTruth) {
    auto c = sim::make_scenario(sim::Maneuver::SharpTurn90, sim::Environment::Clear, 20.0, 3);
    c.noise = sim::NoiseProfile::zero();
    const auto d = sim::simulate(c, 2);
    const auto run = run_ekf(d, StateVector::Constant(1e-9), MeasVector::Constant(1e-9),
                             truth_estimate(d.truth.front(), 1e-6));
    EXPECT_LT(eval::rmse(run.estimates, d.truth), 1e-3);
}

TEST(Ekf, UpdateMatchesUkfUpdate) {
    StateEstimate e;
    e.mean << 1.0, 2.0, 3.0, 4.0, 0.1;
    e.cov = StateVector(2.0, 3.0, 1.0, 1.0, 0.2).asDiagonal();
    e.cov(0, 2) = e.cov(2, 0) = 0.5;
    const auto p = FilterParams::manual_default();
    const sim::GpsFix fix{0.0, 2.0, 1.0, true};
    const auto a = ekf_update(e, fix, p.r_diag);
    const auto b = ukf_update(e, fix, p);
    EXPECT_LT((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((a.cov - b.cov).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Ekf, RejectsInvalidFix) {
    StateEstimate e;
    EXPECT_THROW(ekf_update(e, sim::GpsFix{0.0, 0.0, 0.0, false}, MeasVector::Ones()), std::invalid_argument);
}

TEST(Ekf, UpdatesEqualValidFixes) {
    auto c = sim::make_scenario(sim::Maneuver::GpsOutage3to5s, sim::Environment::Night, 40.0, 4);
    const auto d = sim::simulate(c, 7);
    const auto p = FilterParams::manual_default();
    const auto run = run_ekf(d, p.q_diag, p.r_diag, initial_estimate(d));
    EXPECT_EQ(run.updates, d.valid_fix_count());
}
