#include "fracpde/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fracpde/fracops.hpp"

namespace fracpde {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a64(ss.str());
}

std::string canonical_config_string(const ConfigMap& config) {
    std::string out;
    for (const auto& [k, v] : config) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

void write_text_file(const std::filesystem::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + file.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + file.string());
}

void write_manifest(const std::filesystem::path& file, const RunManifest& manifest) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["artifact_version"] = kArtifactVersion;
    j["kind"] = manifest.kind;
    j["config"] = manifest.config;
    j["input_hash"] = manifest.input_hash;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& f : manifest.outputs) outs.push_back({{"name", f.name}, {"fnv1a64", f.hash}});
    j["outputs"] = outs;
    j["verdicts"] = manifest.verdicts;
    j["timing_ms"] = manifest.timing_ms;
    write_text_file(file, j.dump(2) + "\n");
}

void finalize_manifest(const std::filesystem::path& dir, RunManifest manifest,
                       const std::vector<std::string>& output_names) {
    manifest.outputs.clear();
    for (const auto& name : output_names)
        manifest.outputs.push_back({name, fnv1a64_file(dir / name)});
    write_manifest(dir / "manifest.json", manifest);
}

}  // namespace fracpde
