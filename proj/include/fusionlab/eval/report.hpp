#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fusionlab/eval/suite.hpp"
#include "fusionlab/io/format.hpp"

namespace fusionlab::eval {

namespace fs = std::filesystem;

/// Output file could not be written.
class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const char* const kSummaryHeader =
    "method,rmse,std,ci_low,ci_high,orient_deg,drift_m5s,runtime_ms";

inline std::string summary_row(const MethodSummary& s) {
    using io::format_sig6;
    return std::string(display_name(s.method)) + "," + format_sig6(s.rmse.mean) + "," +
           format_sig6(s.rmse.std_dev) + "," + format_sig6(s.rmse.ci95_low) + "," +
           format_sig6(s.rmse.ci95_high) + "," + format_sig6(s.orientation_err_deg) + "," +
           format_sig6(s.outage_drift_m) + "," + format_sig6(s.runtime_per_update_ms);
}

inline void write_summary_csv(std::ostream& out, const std::vector<MethodSummary>& rows) {
    out << kSummaryHeader << '\n';
    for (const auto& s : rows) out << summary_row(s) << '\n';
}

/// One block of rows per scenario cell.
inline void write_per_scenario_csv(std::ostream& out, const SuiteReport& report) {
    out << "scenario," << kSummaryHeader << '\n';
    for (std::size_t c = 0; c < report.cell_names.size(); ++c)
        for (Method m : report.methods) {
            const auto s = summarize(m, collect_cell(report.trials, m, c));
            out << report.cell_names[c] << ',' << summary_row(s) << '\n';
        }
}

/// t, truth_x, truth_y, then <method>_x, <method>_y per run; one row per
/// IMU sample.
inline void write_trajectory_overlay_csv(std::ostream& out, const sim::SensorDataset& d,
                                         const std::vector<std::pair<Method, filter::FilterRun>>& runs) {
    using io::format_sig6;
    out << "t,truth_x,truth_y";
    for (const auto& [m, run] : runs) {
        if (run.estimates.size() != d.truth.size())
            throw std::invalid_argument("trajectory overlay: run length differs from truth");
        out << ',' << to_string(m) << "_x," << to_string(m) << "_y";
    }
    out << '\n';
    for (std::size_t k = 0; k < d.truth.size(); ++k) {
        out << format_sig6(d.truth[k].t) << ',' << format_sig6(d.truth[k].x) << ','
            << format_sig6(d.truth[k].y);
        for (const auto& [m, run] : runs)
            out << ',' << format_sig6(run.estimates[k].mean(filter::kX)) << ','
                << format_sig6(run.estimates[k].mean(filter::kY));
        out << '\n';
    }
}

/// t,x,y,vx,vy,heading,cov_trace; one row per estimate, full precision.
inline void write_estimates_csv(std::ostream& out, const std::vector<filter::StateEstimate>& est) {
    out << "t,x,y,vx,vy,heading,cov_trace\n";
    for (const auto& e : est) {
        const auto& m = e.mean;
        out << io::format_exact(e.t) << ',' << io::format_exact(m(filter::kX)) << ','
            << io::format_exact(m(filter::kY)) << ',' << io::format_exact(m(filter::kVx)) << ','
            << io::format_exact(m(filter::kVy)) << ',' << io::format_exact(m(filter::kHeading)) << ','
            << io::format_exact(e.cov.trace()) << '\n';
    }
}

/// generation (1-based), best_rmse; one row per generation.
inline void write_convergence_csv(std::ostream& out, const std::vector<double>& history) {
    out << "generation,best_rmse\n";
    for (std::size_t g = 0; g < history.size(); ++g)
        out << (g + 1) << ',' << io::format_sig6(history[g]) << '\n';
}

inline void write_convergence_trials_csv(std::ostream& out,
                                         const std::vector<std::vector<double>>& histories) {
    out << "trial,generation,best_rmse\n";
    for (std::size_t t = 0; t < histories.size(); ++t)
        for (std::size_t g = 0; g < histories[t].size(); ++g)
            out << t << ',' << (g + 1) << ',' << io::format_sig6(histories[t][g]) << '\n';
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ReportError("cannot write " + path.string());
    writer(f);
    if (!f) throw ReportError("write failed: " + path.string());
}

/// Trajectory of one dataset under several methods.
struct Overlay {
    const sim::SensorDataset* dataset = nullptr;
    std::vector<std::pair<Method, filter::FilterRun>> runs;
};

/// Runs every listed method on `d` for the trajectory overlay.
inline Overlay make_overlay(const sim::SensorDataset& d, const std::vector<Method>& methods,
                            const MethodParams& p) {
    Overlay o;
    o.dataset = &d;
    for (Method m : methods) {
        try {
            o.runs.emplace_back(m, run_method(m, d, p));
        } catch (const filter::DivergenceError&) {
        }
    }
    return o;
}

/// Writes summary.csv, per_scenario.csv, trajectory_overlay.csv,
/// estimates_<method>.csv, convergence.csv and convergence_trials.csv into
/// out_dir.
inline void emit_plot_data(const SuiteReport& report, const Overlay& overlay,
                           const std::vector<std::vector<double>>& histories, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::vector<MethodSummary> rows;
    for (Method m : report.methods) rows.push_back(report.summary(m));
    write_file(out_dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, rows); });
    write_file(out_dir / "per_scenario.csv", [&](std::ostream& o) { write_per_scenario_csv(o, report); });
    if (overlay.dataset) {
        write_file(out_dir / "trajectory_overlay.csv",
                   [&](std::ostream& o) { write_trajectory_overlay_csv(o, *overlay.dataset, overlay.runs); });
        for (const auto& [m, run] : overlay.runs)
            write_file(out_dir / ("estimates_" + std::string(to_string(m)) + ".csv"),
                       [&](std::ostream& o) { write_estimates_csv(o, run.estimates); });
    }
    if (!histories.empty()) {
        write_file(out_dir / "convergence.csv",
                   [&](std::ostream& o) { write_convergence_csv(o, histories.front()); });
        write_file(out_dir / "convergence_trials.csv",
                   [&](std::ostream& o) { write_convergence_trials_csv(o, histories); });
    }
}

/// Fixed-width table for terminal output.
inline std::string format_table(const std::vector<MethodSummary>& rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-14s %10s %9s %21s %10s %11s %12s\n", "method", "rmse_m",
                  "std", "ci95", "orient_deg", "drift_m/5s", "ms/update");
    out << line;
    for (const auto& s : rows) {
        std::snprintf(line, sizeof(line), "%-14s %10.4f %9.4f [%8.4f, %8.4f] %10.3f %11.3f %12.5f\n",
                      std::string(display_name(s.method)).c_str(), s.rmse.mean, s.rmse.std_dev,
                      s.rmse.ci95_low, s.rmse.ci95_high, s.orientation_err_deg, s.outage_drift_m,
                      s.runtime_per_update_ms);
        out << line;
    }
    return out.str();
}

}  // namespace fusionlab::eval
