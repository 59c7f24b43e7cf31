#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fusionlab/io/format.hpp"
#include "fusionlab/sim/dataset.hpp"

namespace fusionlab::io {

/// Malformed or unreadable CSV input. The message names file and line.
class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Minimal reader for the fixed-schema numeric CSVs this project writes:
/// header row, comma separators, no quoting.
class CsvTable {
public:
    CsvTable(std::istream& in, std::string source, const std::vector<std::string>& required)
        : source_(std::move(source)) {
        std::string line;
        if (!std::getline(in, line)) throw CsvError(source_ + ": missing header row");
        header_ = split(strip_cr(line));
        for (const auto& col : required) {
            if (index_of(col) < 0) throw CsvError(source_ + ": missing column '" + col + "'");
            columns_.push_back(index_of(col));
        }
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            line = strip_cr(line);
            if (line.empty()) continue;
            auto fields = split(line);
            if (fields.size() != header_.size())
                throw CsvError(source_ + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(header_.size()) + " fields, got " +
                               std::to_string(fields.size()));
            std::vector<double> row;
            row.reserve(columns_.size());
            for (int c : columns_) {
                auto v = parse_double(fields[static_cast<std::size_t>(c)]);
                if (!v)
                    throw CsvError(source_ + ":" + std::to_string(lineno) + ": bad number '" +
                                   fields[static_cast<std::size_t>(c)] + "'");
                row.push_back(*v);
            }
            rows_.push_back(std::move(row));
            lines_.push_back(lineno);
        }
    }

    std::size_t size() const { return rows_.size(); }
    /// Values of the required columns, in the order they were requested.
    const std::vector<double>& row(std::size_t i) const { return rows_[i]; }
    std::size_t line_of(std::size_t i) const { return lines_[i]; }
    const std::string& source() const { return source_; }

private:
    static std::string strip_cr(std::string s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
        return s;
    }

    static std::vector<std::string> split(const std::string& line) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!line.empty() && line.back() == ',') out.emplace_back();
        return out;
    }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < header_.size(); ++i)
            if (header_[i] == name) return static_cast<int>(i);
        return -1;
    }

    std::string source_;
    std::vector<std::string> header_;
    std::vector<int> columns_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::size_t> lines_;
};

inline void write_row(std::ostream& out, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) out << ',';
        out << format_exact(v);
        first = false;
    }
    out << '\n';
}

inline const std::vector<std::string> kTruthColumns = {"t",       "x",       "y",
                                                       "vx",      "vy",      "heading",
                                                       "ax_body", "ay_body", "yaw_rate"};
inline const std::vector<std::string> kImuColumns = {"t", "ax", "ay", "yaw_rate"};
inline const std::vector<std::string> kGpsColumns = {"t", "x", "y", "valid"};
inline const std::vector<std::string> kImuBiasColumns = {"t", "bias_ax", "bias_ay", "bias_gz"};

namespace detail {

inline void write_header(std::ostream& out, const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
}

inline void check_monotonic(const CsvTable& table) {
    for (std::size_t i = 1; i < table.size(); ++i)
        if (!(table.row(i)[0] > table.row(i - 1)[0]))
            throw CsvError(table.source() + ":" + std::to_string(table.line_of(i)) +
                           ": non-monotonic timestamp");
}

}  // namespace detail

inline void write_truth_csv(std::ostream& out, const std::vector<sim::GroundTruthState>& truth) {
    detail::write_header(out, kTruthColumns);
    for (const auto& s : truth)
        write_row(out, {s.t, s.x, s.y, s.vx, s.vy, s.heading, s.ax_body, s.ay_body, s.yaw_rate});
}

inline void write_imu_csv(std::ostream& out, const std::vector<sim::ImuSample>& imu) {
    detail::write_header(out, kImuColumns);
    for (const auto& m : imu) write_row(out, {m.t, m.ax, m.ay, m.yaw_rate});
}

inline void write_imu_bias_csv(std::ostream& out, const std::vector<sim::ImuSample>& imu) {
    detail::write_header(out, kImuBiasColumns);
    for (const auto& m : imu) write_row(out, {m.t, m.bias_ax, m.bias_ay, m.bias_gz});
}

inline void write_gps_csv(std::ostream& out, const std::vector<sim::GpsFix>& gps) {
    detail::write_header(out, kGpsColumns);
    for (const auto& f : gps) {
        out << format_exact(f.t) << ',' << format_exact(f.x) << ',' << format_exact(f.y) << ','
            << (f.valid ? 1 : 0) << '\n';
    }
}

inline std::vector<sim::GroundTruthState> read_truth_csv(std::istream& in,
                                                         const std::string& source = "truth.csv") {
    CsvTable table(in, source, kTruthColumns);
    detail::check_monotonic(table);
    std::vector<sim::GroundTruthState> out;
    out.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& r = table.row(i);
        out.push_back({r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8]});
    }
    return out;
}

inline std::vector<sim::ImuSample> read_imu_csv(std::istream& in,
                                                const std::string& source = "imu.csv") {
    CsvTable table(in, source, kImuColumns);
    if (table.size() == 0) throw CsvError(source + ": empty sensor stream");
    detail::check_monotonic(table);
    std::vector<sim::ImuSample> out;
    out.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& r = table.row(i);
        sim::ImuSample m;
        m.t = r[0];
        m.ax = r[1];
        m.ay = r[2];
        m.yaw_rate = r[3];
        out.push_back(m);
    }
    return out;
}

/// Merges audit biases into already-loaded IMU samples.
inline void read_imu_bias_csv(std::istream& in, std::vector<sim::ImuSample>& imu,
                              const std::string& source = "imu_bias.csv") {
    CsvTable table(in, source, kImuBiasColumns);
    if (table.size() != imu.size()) throw CsvError(source + ": row count differs from imu.csv");
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& r = table.row(i);
        if (r[0] != imu[i].t)
            throw CsvError(source + ":" + std::to_string(table.line_of(i)) +
                           ": timestamp differs from imu.csv");
        imu[i].bias_ax = r[1];
        imu[i].bias_ay = r[2];
        imu[i].bias_gz = r[3];
    }
}

inline std::vector<sim::GpsFix> read_gps_csv(std::istream& in,
                                             const std::string& source = "gps.csv") {
    CsvTable table(in, source, kGpsColumns);
    detail::check_monotonic(table);
    std::vector<sim::GpsFix> out;
    out.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& r = table.row(i);
        if (r[3] != 0.0 && r[3] != 1.0)
            throw CsvError(source + ":" + std::to_string(table.line_of(i)) +
                           ": valid must be 0 or 1");
        out.push_back({r[0], r[1], r[2], r[3] == 1.0});
    }
    return out;
}

namespace fs = std::filesystem;

/// Writes truth.csv, imu.csv, gps.csv and imu_bias.csv into dir.
inline void export_csv(const sim::SensorDataset& d, const fs::path& dir) {
    fs::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
        if (!f) throw CsvError("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("truth.csv");
        write_truth_csv(f, d.truth);
    }
    {
        auto f = open("imu.csv");
        write_imu_csv(f, d.imu);
    }
    {
        auto f = open("imu_bias.csv");
        write_imu_bias_csv(f, d.imu);
    }
    {
        auto f = open("gps.csv");
        write_gps_csv(f, d.gps);
    }
}

/// Reads the sensor streams back. The config is not touched; callers load it
/// separately (see io/config.hpp).
inline void import_csv(const fs::path& dir, sim::SensorDataset& d) {
    auto open = [&](const char* name) {
        std::ifstream f(dir / name, std::ios::binary);
        if (!f) throw CsvError("cannot read " + (dir / name).string());
        return f;
    };
    {
        auto f = open("imu.csv");
        d.imu = read_imu_csv(f, (dir / "imu.csv").string());
    }
    if (fs::exists(dir / "imu_bias.csv")) {
        auto f = open("imu_bias.csv");
        read_imu_bias_csv(f, d.imu, (dir / "imu_bias.csv").string());
    }
    {
        auto f = open("truth.csv");
        d.truth = read_truth_csv(f, (dir / "truth.csv").string());
    }
    {
        auto f = open("gps.csv");
        d.gps = read_gps_csv(f, (dir / "gps.csv").string());
    }
    try {
        d.validate();
    } catch (const sim::DatasetError& e) {
        throw CsvError(dir.string() + ": " + e.what());
    }
}

}  // namespace fusionlab::io
