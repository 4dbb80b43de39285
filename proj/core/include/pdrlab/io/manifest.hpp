#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pdrlab::io {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Per-stage provenance record: the config hash, seed, arguments and content
/// hashes of every input and output artifact. Replaying a stage with the
/// same manifest must reproduce the recorded output hashes byte for byte.
struct Manifest {
    std::string stage;
    std::string tool_version;
    std::string config_hash;
    uint64_t seed = 0;
    std::vector<std::string> args;
    std::map<std::string, std::string> inputs;   // relative path -> sha256
    std::map<std::string, std::string> outputs;  // relative path -> sha256
    std::map<std::string, std::string> extra;

    void save(const std::filesystem::path& path) const;
    static Manifest load(const std::filesystem::path& path);
};

/// Recompute the hash of every recorded output under base_dir. Returns
/// nullopt when everything matches, otherwise a description of the first
/// mismatch.
std::optional<std::string> verify_outputs(const Manifest& manifest,
                                          const std::filesystem::path& base_dir);

}  // namespace pdrlab::io
