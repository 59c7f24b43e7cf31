#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "fusionlab/eval/report.hpp"
#include "fusionlab/eval/runtime.hpp"
#include "fusionlab/eval/suite.hpp"

using namespace fusionlab;
using namespace fusionlab::eval;

namespace {

SuiteConfig small_suite(std::size_t trials = 2) {
    SuiteConfig s;
    s.name = "small";
    s.base_seed = 77;
    s.n_trials = trials;
    s.cells.push_back(sim::make_scenario(sim::Maneuver::SharpTurn90, sim::Environment::Clear, 20.0, 1));
    s.cells.push_back(sim::make_scenario(sim::Maneuver::GpsOutage3to5s, sim::Environment::Rain, 30.0, 2));
    s.tuning.swarm.n_particles = 6;
    s.tuning.swarm.n_generations = 4;
    s.tuning.swarm.seed = 5;
    return s;
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST(Seeds, TrialAndCellStreamsDistinct) {
    std::set<std::uint64_t> seen;
    for (std::size_t t = 0; t < 20; ++t) {
        const auto ts = trial_seed(42, t);
        EXPECT_EQ(ts, trial_seed(42, t));
        EXPECT_TRUE(seen.insert(ts).second);
        for (std::size_t c = 0; c < 25; ++c) EXPECT_TRUE(seen.insert(cell_noise_seed(ts, c)).second);
    }
    EXPECT_NE(trial_seed(42, 0), trial_seed(43, 0));
}

TEST(ScoreRun, ScoresSuffixOnly) {
    const auto c = sim::make_scenario(sim::Maneuver::SharpTurn90, sim::Environment::Clear, 20.0, 3);
    const auto d = sim::simulate(c, 4);
    const auto run = filter::run_filter(filter::FilterParams::manual_default(), d);
    const std::size_t from = test_start_index(d, 0.7);
    EXPECT_EQ(from, sim::partition(d, 0.7).first.imu.size());
    EXPECT_NEAR(d.imu[from].t, 14.0, 1e-9);
    const auto s = score_run(run, d, from);
    const std::span<const filter::StateEstimate> est = std::span(run.estimates).subspan(from);
    const std::span<const sim::GroundTruthState> truth = std::span(d.truth).subspan(from);
    EXPECT_EQ(s.rmse_m, rmse(est, truth));
    EXPECT_EQ(s.orientation_err_deg, orientation_error(est, truth));
    EXPECT_TRUE(std::isnan(s.outage_drift_m));
    EXPECT_FALSE(s.diverged);
    EXPECT_THROW(score_run(run, d, d.truth.size()), std::invalid_argument);
}

TEST(ScoreRun, OutageWindowsClippedToScoredSpan) {
    auto c = sim::make_scenario(sim::Maneuver::StraightCruise500m, sim::Environment::Clear, 40.0, 3);
    c.outage_windows = {{5.0, 9.0}, {26.0, 30.0}, {33.0, 36.0}};
    const auto d = sim::simulate(c, 9);
    const auto run = filter::run_filter(filter::FilterParams::manual_default(), d);
    const std::size_t from = test_start_index(d, 0.7);
    const auto s = score_run(run, d, from);
    // Only [28, 30] and [33, 36] fall after the cut at 28 s.
    const std::vector<sim::OutageWindow> w{{28.0, 30.0}, {33.0, 36.0}};
    EXPECT_EQ(s.outage_drift_m, outage_drift(std::span(run.estimates).subspan(from),
                                             std::span(d.truth).subspan(from), w));
}

TEST(FoldCells, MeansAndDivergence) {
    std::vector<CellScore> cells(2);
    cells[0] = {1.0, 2.0, kNaN, 0.1, false};
    cells[1] = {3.0, 4.0, 6.0, 0.3, false};
    const auto r = fold_cells(Method::EKF, cells, 11);
    EXPECT_EQ(r.method, Method::EKF);
    EXPECT_EQ(r.seed, 11u);
    EXPECT_DOUBLE_EQ(r.rmse_m, 2.0);
    EXPECT_DOUBLE_EQ(r.orientation_err_deg, 3.0);
    EXPECT_DOUBLE_EQ(r.outage_drift_m, 6.0);
    EXPECT_DOUBLE_EQ(r.runtime_per_update_ms, 0.2);
    cells[1].diverged = true;
    EXPECT_TRUE(fold_cells(Method::EKF, cells, 11).diverged);
}

TEST(Summarize, ExcludesDivergentTrials) {
    std::vector<TrialResult> t(4);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i].rmse_m = 1.0 + static_cast<double>(i);
        t[i].orientation_err_deg = 1.0;
        t[i].runtime_per_update_ms = 0.01;
    }
    t[3].diverged = true;
    const auto s = summarize(Method::ManualUKF, t);
    EXPECT_EQ(s.diverged_trials, 1u);
    EXPECT_EQ(s.rmse.n_trials, 3u);
    EXPECT_DOUBLE_EQ(s.rmse.mean, 2.0);
    EXPECT_TRUE(std::isnan(s.outage_drift_m));
    t[1].diverged = t[2].diverged = true;
    EXPECT_THROW(summarize(Method::ManualUKF, t), InsufficientTrials);
}

TEST(MultiTrial, RejectsSingleTrial) {
    auto s = small_suite(1);
    EXPECT_THROW(multi_trial(s), std::invalid_argument);
}

TEST(MultiTrial, RunsEveryMethodAndIsDeterministic) {
    const auto s = small_suite();
    const auto a = multi_trial(s);
    const auto b = multi_trial(s);
    ASSERT_EQ(a.trials.size(), 2u);
    EXPECT_EQ(a.cell_names, (std::vector<std::string>{"SharpTurn90_Clear", "GpsOutage3to5s_Rain"}));
    for (Method m : kAllMethods) {
        const auto sa = a.summary(m);
        const auto sb = b.summary(m);
        EXPECT_EQ(sa.rmse.mean, sb.rmse.mean) << display_name(m);
        EXPECT_EQ(sa.orientation_err_deg, sb.orientation_err_deg);
        EXPECT_EQ(sa.outage_drift_m, sb.outage_drift_m);
        EXPECT_EQ(sa.diverged_trials, 0u);
        EXPECT_TRUE(std::isfinite(sa.outage_drift_m));
    }
    EXPECT_GT(a.summary(Method::DeadReckoning).rmse.mean, a.summary(Method::ManualUKF).rmse.mean);
    ASSERT_TRUE(a.trials[0].tuning.has_value());
    EXPECT_EQ(a.trials[0].tuning->history().size(), 4u);
    EXPECT_NE(a.trials[0].seed, a.trials[1].seed);
}

TEST(MultiTrial, PsoUsesTunedParameters) {
    auto s = small_suite();
    s.methods = {Method::PsoUKF};
    const auto out = run_trial(s, 0);
    const auto sets = simulate_trial(s.cells, trial_seed(s.base_seed, 0));
    for (std::size_t i = 0; i < sets.size(); ++i) {
        MethodParams p;
        p.pso = out.tuning->params_for(i);
        const auto ref = score_run(run_method(Method::PsoUKF, sets[i], p), sets[i],
                                   test_start_index(sets[i], s.train_fraction));
        EXPECT_EQ(out.cells.at(Method::PsoUKF)[i].rmse_m, ref.rmse_m);
    }
}

TEST(MultiTrial, TuningSeesOnlyTrainPrefix) {
    auto s = small_suite();
    const auto sets = simulate_trial(s.cells, trial_seed(s.base_seed, 0));
    const auto train = train_prefixes(sets, s.train_fraction);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        EXPECT_LT(train[i].imu.back().t, sets[i].imu[test_start_index(sets[i], s.train_fraction)].t);
        EXPECT_EQ(train[i].imu.size(), test_start_index(sets[i], s.train_fraction));
    }
}

TEST(MultiTrial, MethodSubset) {
    auto s = small_suite();
    s.methods = {Method::EKF, Method::ManualUKF};
    const auto r = multi_trial(s);
    EXPECT_FALSE(r.trials[0].tuning.has_value());
    EXPECT_EQ(r.trials[0].results.size(), 2u);
    std::ostringstream out;
    std::vector<MethodSummary> rows;
    for (Method m : r.methods) rows.push_back(r.summary(m));
    write_summary_csv(out, rows);
    EXPECT_EQ(count_lines(out.str()), 3u);
}

TEST(Report, SchemasAndRowCounts) {
    const auto s = small_suite();
    const auto r = multi_trial(s);
    const auto sets = simulate_trial(s.cells, trial_seed(s.base_seed, 0));
    const auto overlay = make_overlay(sets[0], r.methods, s.baseline);
    ASSERT_EQ(overlay.runs.size(), 5u);

    std::ostringstream summary, overlay_csv, conv;
    std::vector<MethodSummary> rows;
    for (Method m : r.methods) rows.push_back(r.summary(m));
    write_summary_csv(summary, rows);
    EXPECT_EQ(summary.str().substr(0, summary.str().find('\n')),
              "method,rmse,std,ci_low,ci_high,orient_deg,drift_m5s,runtime_ms");
    write_trajectory_overlay_csv(overlay_csv, sets[0], overlay.runs);
    const std::string o = overlay_csv.str();
    EXPECT_EQ(o.substr(0, o.find('\n')),
              "t,truth_x,truth_y,dead_reckoning_x,dead_reckoning_y,ekf_x,ekf_y,adaptive_ukf_x,"
              "adaptive_ukf_y,manual_ukf_x,manual_ukf_y,pso_ukf_x,pso_ukf_y");
    EXPECT_EQ(count_lines(o), sets[0].imu.size() + 1);
    const auto hist = r.trials[0].tuning->history();
    write_convergence_csv(conv, hist);
    EXPECT_EQ(count_lines(conv.str()), 1 + hist.size());
    EXPECT_EQ(conv.str().substr(0, conv.str().find('\n')), "generation,best_rmse");
    EXPECT_EQ(summary.str().find('\r'), std::string::npos);
}

TEST(Report, SixSignificantDigits) {
    EXPECT_EQ(io::format_sig6(1.23456789), "1.23457");
    EXPECT_EQ(io::format_sig6(21606.594), "21606.6");
    EXPECT_EQ(io::format_sig6(0.000123456789), "0.000123457");
    EXPECT_EQ(io::format_sig6(kNaN), "nan");
}

TEST(Runtime, UnderBudgetAndOrdered) {
    const auto c = sim::make_scenario(sim::Maneuver::SharpTurn90, sim::Environment::Clear, 40.0, 3);
    const auto d = sim::simulate(c, 1);
    const MethodParams p;
    const auto ukf = benchmark_runtime(Method::ManualUKF, d, p, 5);
    const auto dr = benchmark_runtime(Method::DeadReckoning, d, p, 5);
    EXPECT_EQ(ukf.cycles, d.imu.size() - 1);
    EXPECT_EQ(ukf.repetitions_ms.size(), 5u);
    EXPECT_TRUE(ukf.passes());
    EXPECT_LT(ukf.ms_per_update, kRealTimeBudgetMs);
    EXPECT_LE(dr.ms_per_update, ukf.ms_per_update);
    EXPECT_THROW(benchmark_runtime(Method::ManualUKF, d, p, 2), std::invalid_argument);
}

TEST(Runtime, MedianStableAcrossRuns) {
    const auto c = sim::make_scenario(sim::Maneuver::SharpTurn90, sim::Environment::Clear, 60.0, 3);
    const auto d = sim::simulate(c, 1);
    const MethodParams p;
    const double a = benchmark_runtime(Method::ManualUKF, d, p, 7).ms_per_update;
    const double b = benchmark_runtime(Method::ManualUKF, d, p, 7).ms_per_update;
    EXPECT_LT(std::abs(a - b) / std::min(a, b), 0.5);
}
