#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tpi {

inline constexpr const char* kToolVersion = "tpi 1.0.0";

// SHA-256 of a byte string / file, lowercase hex.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

struct ManifestEntry {
    std::string path;      // relative to the manifest's directory
    std::string sha256;
    std::uint64_t bytes = 0;
};

// Run record: config echo, tool version, seeds, timestamp, output checksums.
// generated_at is the only field that varies between identical reruns.
struct RunManifest {
    std::string command;
    std::string config_echo;
    std::optional<std::uint64_t> seed;
    std::vector<ManifestEntry> outputs;
    std::vector<std::string> warnings;

    // Lists every file, hashing each; writes <out_dir>/manifest.json.
    void write(const std::string& out_dir) const;
};

}  // namespace tpi
