#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "fusionlab/io/config.hpp"
#include "fusionlab/io/csv.hpp"

namespace fusionlab::io {

// On-disk layout of a simulated suite:
//   <root>/index.yaml                      suite name, trials, scenario list
//   <root>/<scenario>/scenario.yaml        resolved scenario config
//   <root>/<scenario>/trial_NN/            truth/imu/imu_bias/gps CSVs
//   <root>/<scenario>/trial_NN/dataset.yaml  trial, noise seed, train split

struct StoreIndex {
    std::string name;
    std::uint64_t base_seed = 0;
    std::size_t n_trials = 0;
    std::vector<std::string> scenarios;
};

inline std::string trial_dir_name(std::size_t trial) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "trial_%02zu", trial);
    return buf;
}

inline std::string emit_index(const StoreIndex& idx) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << idx.name;
    e << YAML::Key << "base_seed" << YAML::Value << idx.base_seed;
    e << YAML::Key << "trials" << YAML::Value << idx.n_trials;
    e << YAML::Key << "scenarios" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : idx.scenarios) e << s;
    e << YAML::EndSeq << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

inline StoreIndex load_index(const fs::path& root) {
    const fs::path path = root / "index.yaml";
    if (!fs::exists(path)) throw ConfigError(root.string() + ": not a dataset directory (index.yaml missing)");
    const std::string src = path.string();
    const YAML::Node n = detail::load(read_text(path), src);
    StoreIndex idx;
    idx.name = detail::get<std::string>(src, n, "name");
    idx.base_seed = detail::get<std::uint64_t>(src, n, "base_seed");
    idx.n_trials = detail::get<std::size_t>(src, n, "trials");
    for (const auto& s : n["scenarios"]) idx.scenarios.push_back(s.as<std::string>());
    if (idx.scenarios.empty()) throw ConfigError(src + ": no scenarios listed");
    return idx;
}

/// Per-dataset metadata written next to the CSVs.
struct DatasetMeta {
    std::size_t trial = 0;
    std::uint64_t noise_seed = 0;
    std::optional<double> train_fraction;
};

inline std::string emit_meta(const DatasetMeta& m) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "trial" << YAML::Value << m.trial;
    e << YAML::Key << "noise_seed" << YAML::Value << m.noise_seed;
    if (m.train_fraction)
        e << YAML::Key << "split" << YAML::Value << YAML::BeginMap << YAML::Key << "train_fraction"
          << YAML::Value << format_exact(*m.train_fraction) << YAML::EndMap;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

inline DatasetMeta load_meta(const fs::path& dir) {
    const fs::path path = dir / "dataset.yaml";
    const std::string src = path.string();
    const YAML::Node n = detail::load(read_text(path), src);
    DatasetMeta m;
    m.trial = detail::get<std::size_t>(src, n, "trial");
    m.noise_seed = detail::get<std::uint64_t>(src, n, "noise_seed");
    if (const YAML::Node s = n["split"]) m.train_fraction = detail::get<double>(src, s, "train_fraction");
    return m;
}

/// Writes one dataset (CSVs plus metadata) under root/<scenario>/trial_NN.
inline void store_dataset(const fs::path& root, const sim::SensorDataset& d, const DatasetMeta& meta) {
    const fs::path cell = root / d.config.name;
    fs::create_directories(cell);
    write_text(cell / "scenario.yaml", emit_scenario(d.config));
    const fs::path dir = cell / trial_dir_name(meta.trial);
    export_csv(d, dir);
    write_text(dir / "dataset.yaml", emit_meta(meta));
}

struct LoadedDataset {
    sim::SensorDataset data;
    DatasetMeta meta;
};

inline LoadedDataset load_dataset(const fs::path& root, const std::string& scenario, std::size_t trial) {
    const fs::path cell = root / scenario;
    const fs::path scen = cell / "scenario.yaml";
    LoadedDataset out;
    out.data.config = parse_scenario(read_text(scen), scen.string());
    const fs::path dir = cell / trial_dir_name(trial);
    if (!fs::is_directory(dir)) throw std::ios_base::failure("missing dataset " + dir.string());
    import_csv(dir, out.data);
    out.meta = load_meta(dir);
    return out;
}

/// All scenarios of one trial, in index order.
inline std::vector<LoadedDataset> load_trial(const fs::path& root, const StoreIndex& idx, std::size_t trial) {
    std::vector<LoadedDataset> out;
    for (const auto& s : idx.scenarios) out.push_back(load_dataset(root, s, trial));
    return out;
}

}  // namespace fusionlab::io
