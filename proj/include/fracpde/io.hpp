#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fracpde {

inline constexpr const char* kSchemaVersion = "1";

/// Flat key=value configuration, ordered for deterministic serialization.
using ConfigMap = std::map<std::string, std::string>;

/// Shortest round-trip decimal form of a double ("%.17g" trimmed); used for
/// all CSV output so reruns are byte-identical.
std::string format_double(double x);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& file);

std::string canonical_config_string(const ConfigMap& config);

void write_text_file(const std::filesystem::path& file, const std::string& content);

struct OutputFile {
    std::string name;
    std::uint64_t hash = 0;
};

/**
 * Reproducibility record of one experiment: with the same artifact version,
 * configuration, and seed the listed outputs regenerate bit-for-bit. The
 * wall-clock field is the single entry that varies between reruns.
 */
struct RunManifest {
    std::string kind;
    ConfigMap config;
    std::uint64_t input_hash = 0;
    std::vector<OutputFile> outputs;
    std::map<std::string, std::string> verdicts;
    double timing_ms = 0.0;
};

void write_manifest(const std::filesystem::path& file, const RunManifest& manifest);

/// Hashes every output already on disk and writes the manifest next to them.
void finalize_manifest(const std::filesystem::path& dir, RunManifest manifest,
                       const std::vector<std::string>& output_names);

}  // namespace fracpde
