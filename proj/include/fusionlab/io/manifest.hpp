#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "fusionlab/io/config.hpp"

namespace fusionlab::io {

inline constexpr const char* kToolVersion = "1.0.0";

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

/// Digest over the contents of every input config, in the given order.
/// File names are not hashed, so copies of a config hash identically.
inline std::string config_hash(const std::vector<fs::path>& configs) {
    std::string blob;
    for (const auto& p : configs) {
        const std::string text = read_text(p);
        blob += std::to_string(text.size());
        blob += '\n';
        blob += text;
    }
    return sha256_hex(blob);
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string command;
    std::vector<std::string> arguments;
    std::vector<fs::path> configs;
    std::string config_hash;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> overrides;  // e.g. "seed=42"
    std::string tool_version = kToolVersion;
    std::chrono::system_clock::time_point started;
    std::chrono::system_clock::time_point finished;
};

inline std::string emit_manifest(const RunManifest& m) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "tool_version" << YAML::Value << m.tool_version;
    e << YAML::Key << "command" << YAML::Value << m.command;
    e << YAML::Key << "arguments" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& a : m.arguments) e << a;
    e << YAML::EndSeq;
    e << YAML::Key << "configs" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : m.configs) e << fs::absolute(c).lexically_normal().string();
    e << YAML::EndSeq;
    e << YAML::Key << "config_hash" << YAML::Value << m.config_hash;
    e << YAML::Key << "seeds" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (auto s : m.seeds) e << s;
    e << YAML::EndSeq;
    e << YAML::Key << "overrides" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& o : m.overrides) e << o;
    e << YAML::EndSeq;
    e << YAML::Key << "started_utc" << YAML::Value << utc_timestamp(m.started);
    e << YAML::Key << "finished_utc" << YAML::Value << utc_timestamp(m.finished);
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

/// Writes manifest.yaml via a temporary file and rename.
inline void write_manifest(const fs::path& out_dir, const RunManifest& m) {
    fs::create_directories(out_dir);
    const fs::path tmp = out_dir / "manifest.yaml.tmp";
    write_text(tmp, emit_manifest(m));
    fs::rename(tmp, out_dir / "manifest.yaml");
}

}  // namespace fusionlab::io
