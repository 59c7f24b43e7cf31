#include <gtest/gtest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "fusionlab/eval/metrics.hpp"
#include "fusionlab/filter/dead_reckoning.hpp"
#include "fusionlab/filter/ukf.hpp"

using namespace fusionlab;
using namespace fusionlab::filter;

namespace {

StateEstimate at_rest(double var = 1.0) {
    StateEstimate s;
    s.cov = StateMatrix::Identity() * var;
    return s;
}

sim::SensorDataset noiseless(sim::Maneuver m, double duration, double heading = 0.4) {
    auto c = sim::make_scenario(m, sim::Environment::Clear, duration, 2);
    c.noise = sim::NoiseProfile::zero();
    c.profile.initial_heading = heading;
    if (m == sim::Maneuver::GpsOutage3to5s) c.outage_windows = sim::place_outage_windows(c);
    return sim::simulate(c, 1);
}

// Closed-form KF for the zero-input strapdown model: p += v dt, heading held.
struct LinearKf {
    StateVector x;
    StateMatrix p;

    void predict(double dt, const StateVector& q) {
        StateMatrix f = StateMatrix::Identity();
        f(kX, kVx) = dt;
        f(kY, kVy) = dt;
        x = f * x;
        p = f * p * f.transpose();
        p.diagonal() += q * dt;
    }
    void update(const MeasVector& z, const MeasVector& r) {
        Eigen::Matrix<double, kMeasDim, kStateDim> h = Eigen::Matrix<double, kMeasDim, kStateDim>::Zero();
        h(0, kX) = 1.0;
        h(1, kY) = 1.0;
        const MeasMatrix s = h * p * h.transpose() + MeasMatrix(r.asDiagonal());
        const Eigen::Matrix<double, kStateDim, kMeasDim> k = p * h.transpose() * s.inverse();
        x += k * (z - h * x);
        p = (StateMatrix::Identity() - k * h) * p * (StateMatrix::Identity() - k * h).transpose() +
            k * MeasMatrix(r.asDiagonal()) * k.transpose();
    }
};

}  // namespace

TEST(UkfPredict, StationaryGrowsByQ) {
    auto p = FilterParams::manual_default();
    p.q_diag << 0.1, 0.2, 0.3, 0.4, 0.5;
    const auto s = ukf_predict(at_rest(), ImuInput{}, 0.5, p);
    EXPECT_LT(s.mean.norm(), 1e-12);
    StateMatrix expected = StateMatrix::Identity();
    expected(kX, kX) += 0.25;
    expected(kY, kY) += 0.25;
    expected(kX, kVx) = expected(kVx, kX) = 0.5;
    expected(kY, kVy) = expected(kVy, kY) = 0.5;
    expected.diagonal() += p.q_diag * 0.5;
    EXPECT_LT((s.cov - expected).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_DOUBLE_EQ(s.t, 0.5);
}

TEST(UkfPredict, StationaryZeroVelocityDiagonalGrowth) {
    StateEstimate e = at_rest();
    e.cov = StateMatrix::Identity() * 1e-12;
    const auto p = FilterParams::manual_default();
    const auto s = ukf_predict(e, ImuInput{}, 0.01, p);
    EXPECT_LT((s.cov.diagonal() - (StateVector::Constant(1e-12) + p.q_diag * 0.01)).cwiseAbs().maxCoeff(),
              1e-12);
}

TEST(UkfPredict, ConstantAccelerationKinematics) {
    const auto s = ukf_predict(at_rest(1e-14), ImuInput{1.0, 0.0, 0.0}, 1.0, FilterParams::manual_default());
    EXPECT_NEAR(s.mean(kVx), 1.0, 1e-9);
    EXPECT_NEAR(s.mean(kX), 0.5, 1e-9);
    EXPECT_NEAR(s.mean(kVy), 0.0, 1e-9);
}

TEST(UkfPredict, RotatesBodyAccelByHeading) {
    auto e = at_rest(1e-6);
    e.mean(kHeading) = kPi / 2.0;
    const double ax = 1.0, ay = 0.3;
    const auto s = ukf_predict(e, ImuInput{ax, ay, 0.0}, 1.0, FilterParams::manual_default());
    Eigen::Matrix2d rot;
    rot << 0.0, -1.0, 1.0, 0.0;
    const Eigen::Vector2d a = rot * Eigen::Vector2d(ax, ay);
    EXPECT_NEAR(s.mean(kVx), a(0), 1e-6);
    EXPECT_NEAR(s.mean(kVy), a(1), 1e-6);
    EXPECT_GT(s.mean(kVy), 0.9);
}

TEST(UkfPredict, RejectsNonPositiveDt) {
    EXPECT_THROW(ukf_predict(at_rest(), ImuInput{}, 0.0, FilterParams::manual_default()),
                 std::invalid_argument);
}

TEST(UkfUpdate, ZeroInnovationKeepsPosition) {
    auto e = at_rest();
    e.mean << 3.0, -4.0, 1.0, 2.0, 0.5;
    const auto s = ukf_update(e, sim::GpsFix{0.0, 3.0, -4.0, true}, FilterParams::manual_default());
    EXPECT_NEAR(s.mean(kX), 3.0, 1e-12);
    EXPECT_NEAR(s.mean(kY), -4.0, 1e-12);
    EXPECT_LT(s.cov.trace(), e.cov.trace());
}

TEST(UkfUpdate, UninformativeMeasurement) {
    auto e = at_rest(2.0);
    e.mean << 3.0, -4.0, 1.0, 2.0, 0.5;
    auto p = FilterParams::manual_default();
    p.r_diag.setConstant(1e9);
    const auto s = ukf_update(e, sim::GpsFix{0.0, 50.0, 60.0, true}, p);
    EXPECT_LT((s.mean - e.mean).norm() / e.mean.norm(), 1e-3);
    EXPECT_LT((s.cov - e.cov).norm() / e.cov.norm(), 1e-3);
}

TEST(UkfUpdate, MatchesClosedFormKalman) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    StateMatrix a;
    for (int i = 0; i < a.size(); ++i) a(i) = u(rng);
    auto e = at_rest();
    e.cov = a * a.transpose() + 0.1 * StateMatrix::Identity();
    e.mean << 1.0, 2.0, 3.0, -1.0, 0.2;
    auto p = FilterParams::manual_default();
    p.r_diag << 0.7, 1.3;
    const auto s = ukf_update(e, sim::GpsFix{0.0, 1.5, 1.0, true}, p);
    LinearKf kf{e.mean, e.cov};
    kf.update(MeasVector(1.5, 1.0), p.r_diag);
    EXPECT_LT((s.mean - kf.x).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((s.cov - kf.p).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(UkfUpdate, RejectsInvalidFix) {
    EXPECT_THROW(ukf_update(at_rest(), sim::GpsFix{0.0, 0.0, 0.0, false}, FilterParams::manual_default()),
                 std::invalid_argument);
}

TEST(UkfUpdate, NonFiniteCovarianceDiverges) {
    auto e = at_rest();
    e.cov(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(ukf_update(e, sim::GpsFix{0.0, 1.0, 1.0, true}, FilterParams::manual_default()), DivergenceError);
    EXPECT_THROW(ukf_predict(e, ImuInput{}, 0.01, FilterParams::manual_default()), DivergenceError);
}

TEST(UkfUpdate, ZeroCovarianceZeroNoiseStaysFinite) {
    auto e = at_rest();
    e.cov.setZero();
    auto p = FilterParams::manual_default();
    p.r_diag.setZero();
    const auto s = ukf_update(e, sim::GpsFix{0.0, 1.0, 1.0, true}, p);
    EXPECT_TRUE(s.mean.allFinite());
    EXPECT_TRUE(s.cov.allFinite());
}

TEST(LinearGaussian, UkfEqualsKalmanOver100Steps) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        FilterParams p;
        p.alpha = trial == 0 ? 1e-3 : 1e-3 + (1.0 - 1e-3) * unit(rng);
        p.beta = 3.0 * unit(rng);
        p.kappa = 5.0 * unit(rng);
        for (int i = 0; i < kStateDim; ++i) p.q_diag(i) = std::pow(10.0, -3.0 + 2.0 * unit(rng));
        for (int i = 0; i < kMeasDim; ++i) p.r_diag(i) = std::pow(10.0, -1.0 + unit(rng));
        StateEstimate e;
        e.mean << 1.0, -2.0, 0.5, 1.5, 0.3;
        e.cov = StateVector(4.0, 4.0, 1.0, 1.0, 0.1).asDiagonal();
        LinearKf kf{e.mean, e.cov};
        StateVector truth = e.mean;
        const double dt = 0.1;
        for (int k = 0; k < 100; ++k) {
            e = ukf_predict(e, ImuInput{}, dt, p);
            kf.predict(dt, p.q_diag);
            truth(kX) += truth(kVx) * dt;
            truth(kY) += truth(kVy) * dt;
            const MeasVector z(truth(kX) + gauss(rng), truth(kY) + gauss(rng));
            e = ukf_update(e, sim::GpsFix{e.t, z(0), z(1), true}, p);
            kf.update(z, p.r_diag);
            ASSERT_LT((e.mean - kf.x).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial << " step " << k;
            ASSERT_LT((e.cov - kf.p).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial << " step " << k;
        }
    }
}

TEST(RunFilter, NoiselessTracksTruth) {
    const auto d = noiseless(sim::Maneuver::SharpTurn90, 20.0);
    const auto p = FilterParams::isotropic(0.5, 2.0, 0.0, 1e-9, 1e-9);
    const auto run = run_filter(p, d, truth_estimate(d.truth.front(), 1e-6));
    EXPECT_EQ(run.estimates.size(), d.imu.size());
    EXPECT_LT(eval::rmse(run.estimates, d.truth), 1e-3);
}

TEST(RunFilter, UpdatesEqualValidFixes) {
    auto c = sim::make_scenario(sim::Maneuver::GpsOutage3to5s, sim::Environment::Rain, 40.0, 6);
    const auto d = sim::simulate(c, 3);
    const auto run = run_filter(FilterParams::manual_default(), d);
    EXPECT_EQ(run.updates, d.valid_fix_count());
    EXPECT_LT(run.updates, d.gps.size());
}

TEST(RunFilter, CovarianceGrowsThroughOutage) {
    auto c = sim::make_scenario(sim::Maneuver::GpsOutage3to5s, sim::Environment::Clear, 40.0, 6);
    const auto d = sim::simulate(c, 3);
    const auto run = run_filter(FilterParams::manual_default(), d);
    for (const auto& w : c.outage_windows) {
        double prev = -1.0;
        for (const auto& e : run.estimates) {
            if (e.t <= w.start_s || e.t >= w.end_s) continue;
            const double tr = e.cov(kX, kX) + e.cov(kY, kY);
            EXPECT_GE(tr, prev - 1e-12);
            prev = tr;
        }
        EXPECT_GT(prev, 0.0);
    }
}

TEST(RunFilter, CovarianceHealthAndHeadingWrap) {
    auto c = sim::make_scenario(sim::Maneuver::SharpTurn90, sim::Environment::Fog, 30.0, 9);
    c.profile.initial_heading = 2.9;
    const auto d = sim::simulate(c, 4);
    const auto run = run_filter(FilterParams::manual_default(), d);
    for (const auto& e : run.estimates) {
        EXPECT_LT((e.cov - e.cov.transpose()).cwiseAbs().maxCoeff(), 1e-10);
        Eigen::SelfAdjointEigenSolver<StateMatrix> eig(e.cov);
        EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
        EXPECT_GT(e.mean(kHeading), -kPi);
        EXPECT_LE(e.mean(kHeading), kPi);
    }
}

TEST(RunFilter, Deterministic) {
    const auto d = sim::simulate(sim::make_scenario(sim::Maneuver::RapidAccel0to60in5s, sim::Environment::Night, 20.0, 2), 8);
    const auto a = run_filter(FilterParams::manual_default(), d);
    const auto b = run_filter(FilterParams::manual_default(), d);
    for (std::size_t k = 0; k < a.estimates.size(); ++k) ASSERT_EQ(a.estimates[k].mean, b.estimates[k].mean);
}

TEST(InitialEstimate, FirstFixesAndLoosePrior) {
    sim::SensorDataset d;
    d.imu = {{0.0}, {0.01}};
    d.gps = {{0.0, 5.0, 1.0, false}, {0.2, 2.0, 3.0, true}, {0.4, 3.0, 4.0, true}};
    const auto e = initial_estimate(d);
    EXPECT_DOUBLE_EQ(e.mean(kX), 2.0);
    EXPECT_DOUBLE_EQ(e.mean(kY), 3.0);
    EXPECT_DOUBLE_EQ(e.mean(kVx), 0.0);
    EXPECT_DOUBLE_EQ(e.mean(kHeading), kPi / 4.0);
    EXPECT_EQ(e.cov.diagonal(), StateVector(10.0, 10.0, 4.0, 4.0, 0.5));
    d.gps = {{0.0, 5.0, 1.0, false}};
    EXPECT_THROW(initial_estimate(d), std::invalid_argument);
}

TEST(DeadReckoning, NoiselessFollowsTruth) {
    const auto d = noiseless(sim::Maneuver::GpsOutage3to5s, 60.0);
    const auto run = run_dead_reckoning(d, truth_estimate(d.truth.front(), 1.0));
    const auto& last = run.estimates.back();
    EXPECT_LT(std::hypot(last.mean(kX) - d.truth.back().x, last.mean(kY) - d.truth.back().y), 1e-2);
}

TEST(DeadReckoning, ConstantBiasGrowsQuadratically) {
    auto c = sim::make_scenario(sim::Maneuver::StraightCruise500m, sim::Environment::Clear, 60.0, 1);
    c.noise = sim::NoiseProfile::zero();
    c.noise.initial_accel_bias = 0.02;
    const auto d = sim::simulate(c, 1);
    const auto run = run_dead_reckoning(d, truth_estimate(d.truth.front(), 1.0));
    auto err = [&](std::size_t k) {
        return std::hypot(run.estimates[k].mean(kX) - d.truth[k].x, run.estimates[k].mean(kY) - d.truth[k].y);
    };
    const double e30 = err(3000), e60 = err(6000);
    EXPECT_NEAR(e60 / e30, 4.0, 0.4);
    EXPECT_NEAR(e60, 0.5 * std::sqrt(2.0) * 0.02 * 3600.0, 0.1 * e60);
}

TEST(DeadReckoning, DriftDwarfsFusedError) {
    auto c = sim::make_scenario(sim::Maneuver::StraightCruise500m, sim::Environment::Clear, 60.0, 3);
    const auto d = sim::simulate(c, 5);
    const auto dr = run_dead_reckoning(d);
    const auto ukf = run_filter(FilterParams::manual_default(), d);
    const auto& t = d.truth.back();
    const double dr_err = std::hypot(dr.estimates.back().mean(kX) - t.x, dr.estimates.back().mean(kY) - t.y);
    const double ukf_err = std::hypot(ukf.estimates.back().mean(kX) - t.x, ukf.estimates.back().mean(kY) - t.y);
    EXPECT_GT(dr_err, 100.0 * ukf_err);
}

TEST(DeadReckoning, ErrorAtTwiceTheTimeIsLarger) {
    for (auto env : sim::kAllEnvironments) {
        const auto d = sim::simulate(sim::make_scenario(sim::Maneuver::StraightCruise500m, env, 60.0, 4), 11);
        const auto run = run_dead_reckoning(d, truth_estimate(d.truth.front(), 1.0));
        auto err = [&](std::size_t k) {
            return std::hypot(run.estimates[k].mean(kX) - d.truth[k].x, run.estimates[k].mean(kY) - d.truth[k].y);
        };
        EXPECT_GT(err(6000), err(3000)) << sim::to_string(env);
    }
}
