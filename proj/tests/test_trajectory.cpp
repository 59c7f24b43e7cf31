#include <gtest/gtest.h>

#include <cmath>

#include "fusionlab/sim/trajectory.hpp"

using namespace fusionlab;
using namespace fusionlab::sim;

namespace {

ScenarioConfig scenario(Maneuver m, double duration, double heading = 0.0) {
    auto c = make_scenario(m, Environment::Clear, duration, 5);
    c.profile.initial_heading = heading;
    return c;
}

double speed(const GroundTruthState& s) { return std::hypot(s.vx, s.vy); }

// Five-point central difference of f at index k.
template <class F>
double d5(const std::vector<GroundTruthState>& tr, std::size_t k, double h, F f) {
    return (-f(tr[k + 2]) + 8.0 * f(tr[k + 1]) - 8.0 * f(tr[k - 1]) + f(tr[k - 2])) / (12.0 * h);
}

}  // namespace

TEST(GroundTruth, SampledOnImuGrid) {
    const auto c = scenario(Maneuver::SharpTurn90, 20.0);
    const auto tr = generate_ground_truth(c);
    ASSERT_EQ(tr.size(), 2001u);
    for (std::size_t k = 0; k < tr.size(); ++k) EXPECT_DOUBLE_EQ(tr[k].t, k / 100.0);
}

TEST(GroundTruth, StraightCruiseCovers500m) {
    auto c = scenario(Maneuver::StraightCruise500m, 50.0, 0.7);
    const auto tr = generate_ground_truth(c);
    EXPECT_NEAR(speed(tr.front()), 10.0, 1e-12);
    EXPECT_NEAR(std::hypot(tr.back().x, tr.back().y), 500.0, 1e-9);
    for (const auto& s : tr) EXPECT_DOUBLE_EQ(s.heading, 0.7);
}

TEST(GroundTruth, RapidAccelReaches60kmhAt5s) {
    const auto tr = generate_ground_truth(scenario(Maneuver::RapidAccel0to60in5s, 10.0));
    EXPECT_DOUBLE_EQ(speed(tr[0]), 0.0);
    EXPECT_NEAR(speed(tr[500]), 16.6667, 1e-4);
    EXPECT_NEAR(speed(tr[500]), 60.0 / 3.6, 1e-12);
}

TEST(GroundTruth, AbruptBrakeStopsIn2s) {
    auto c = scenario(Maneuver::AbruptBrake50to0in2s, 20.0);
    c.profile.brake_start_s = 10.0;
    const auto tr = generate_ground_truth(c);
    EXPECT_NEAR(speed(tr[1000]), 50.0 / 3.6, 1e-12);
    EXPECT_NEAR(speed(tr[1200]), 0.0, 1e-12);
    EXPECT_NEAR(speed(tr.back()), 0.0, 1e-12);
}

TEST(GroundTruth, SharpTurnSweepsQuarterCircle) {
    auto c = scenario(Maneuver::SharpTurn90, 20.0, 0.3);
    c.profile.turn_speed = 5.0;
    const auto tr = generate_ground_truth(c);
    EXPECT_NEAR(tr.back().heading - tr.front().heading, kPi / 2.0, 1e-9);
    for (const auto& s : tr) EXPECT_NEAR(speed(s), 5.0, 1e-12);
}

TEST(GroundTruth, TurnMatchesCircularArcOracle) {
    // Independent Simpson integral of the analytic velocity.
    auto c = scenario(Maneuver::SharpTurn90, 20.0);
    const auto tr = generate_ground_truth(c);
    const MotionProfile p(c);
    const int n = 200000;
    const double a = 0.0, b = 20.0, h = (b - a) / n;
    double x = 0.0, y = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t0 = a + i * h, t1 = t0 + 0.5 * h, t2 = t0 + h;
        const auto v0 = p.velocity(t0), v1 = p.velocity(t1), v2 = p.velocity(t2);
        x += h / 6.0 * (v0[0] + 4.0 * v1[0] + v2[0]);
        y += h / 6.0 * (v0[1] + 4.0 * v1[1] + v2[1]);
    }
    EXPECT_NEAR(tr.back().x, x, 1e-9);
    EXPECT_NEAR(tr.back().y, y, 1e-9);
}

TEST(GroundTruth, KinematicConsistency) {
    for (Maneuver m : kAllManeuvers) {
        auto c = scenario(m, 40.0, -2.1);
        c.imu_rate_hz = 1000;
        const auto tr = generate_ground_truth(c);
        const double h = 0.001;
        double ve = 0.0, ae = 0.0;
        for (std::size_t k = 2; k + 2 < tr.size(); ++k) {
            const double vx = d5(tr, k, h, [](const auto& s) { return s.x; });
            const double vy = d5(tr, k, h, [](const auto& s) { return s.y; });
            ve = std::max({ve, std::abs(vx - tr[k].vx), std::abs(vy - tr[k].vy)});
            const double ax = d5(tr, k, h, [](const auto& s) { return s.vx; });
            const double ay = d5(tr, k, h, [](const auto& s) { return s.vy; });
            const double ch = std::cos(tr[k].heading), sh = std::sin(tr[k].heading);
            ae = std::max({ae, std::abs(ch * ax + sh * ay - tr[k].ax_body),
                           std::abs(-sh * ax + ch * ay - tr[k].ay_body)});
        }
        EXPECT_LT(ve, 1e-6) << to_string(m);
        EXPECT_LT(ae, 1e-4) << to_string(m);
    }
}

TEST(GroundTruth, HeadingWrapped) {
    auto c = scenario(Maneuver::SharpTurn90, 20.0, 3.0);
    for (const auto& s : generate_ground_truth(c)) {
        EXPECT_GT(s.heading, -kPi);
        EXPECT_LE(s.heading, kPi);
    }
}

TEST(GroundTruth, RejectsTooShortDuration) {
    auto c = scenario(Maneuver::StraightCruise500m, 60.0);
    c.duration_s = 5.0;
    EXPECT_THROW(generate_ground_truth(c), ScenarioError);
    c = scenario(Maneuver::SharpTurn90, 20.0);
    c.duration_s = 10.0;
    EXPECT_THROW(generate_ground_truth(c), ScenarioError);
    c = scenario(Maneuver::RapidAccel0to60in5s, 20.0);
    c.duration_s = 4.0;
    EXPECT_THROW(generate_ground_truth(c), ScenarioError);
}

TEST(ScenarioConfig, ValidatesRatesAndWindows) {
    auto c = scenario(Maneuver::StraightCruise500m, 60.0);
    c.gps_rate_hz = 3;
    EXPECT_THROW(c.validate(), ScenarioError);
    c = scenario(Maneuver::StraightCruise500m, 60.0);
    c.outage_windows = {{10.0, 14.0}, {13.0, 15.0}};
    EXPECT_THROW(c.validate(), ScenarioError);
    c.outage_windows = {{58.0, 62.0}};
    EXPECT_THROW(c.validate(), ScenarioError);
    c = scenario(Maneuver::GpsOutage3to5s, 60.0);
    c.outage_windows = {{10.0, 12.0}};
    EXPECT_THROW(c.validate(), ScenarioError);
    c.outage_windows = {{10.0, 15.0}};
    EXPECT_NO_THROW(c.validate());
}

TEST(OutagePlacement, WindowsDisjointAndInRange) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto c = make_scenario(Maneuver::GpsOutage3to5s, Environment::Fog, 60.0, seed);
        c.profile.outage_count = 6;
        c.outage_windows = place_outage_windows(c);
        ASSERT_EQ(c.outage_windows.size(), 6u);
        EXPECT_NO_THROW(c.validate());
        for (const auto& w : c.outage_windows) {
            EXPECT_GE(w.length(), 3.0 - 1e-9);
            EXPECT_LE(w.length(), 5.0 + 1e-9);
        }
    }
}

TEST(InitialHeading, DrawnUniformlyFromSeed) {
    EXPECT_EQ(draw_initial_heading(3), draw_initial_heading(3));
    double mean = 0.0;
    for (std::uint64_t s = 0; s < 4000; ++s) {
        const double h = draw_initial_heading(s);
        ASSERT_GE(h, -kPi);
        ASSERT_LT(h, kPi);
        mean += h / 4000.0;
    }
    EXPECT_NEAR(mean, 0.0, 0.15);
}
