#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace preheat {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// UTC time as ISO 8601 with seconds.
std::string utc_timestamp();

struct FileRecord {
    std::string name;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

/// JSON run record: config echo, derived physical values, file checksums,
/// status and, after an abort, the failure point.
struct RunManifest {
    std::string command;
    std::string version;
    std::string config;
    std::uint64_t master_seed = 0;
    nlohmann::ordered_json derived = nlohmann::ordered_json::object();
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
    std::string started;
    std::string finished;
    /// "running", "complete" or "failed".
    std::string status = "running";
    nlohmann::ordered_json failure;
    std::vector<FileRecord> files;

    nlohmann::ordered_json to_json() const;
    static RunManifest from_json(const nlohmann::ordered_json& j);

    /// Writes atomically (temporary file + rename) and fsyncs.
    void write(const std::filesystem::path& path) const;
    static RunManifest read(const std::filesystem::path& path);

    /// Adds or refreshes the checksum of dir / name.
    void record_file(const std::filesystem::path& dir, const std::string& name);
    /// Empty when every listed file exists with the recorded checksum,
    /// otherwise a description of the first mismatch.
    std::string verify(const std::filesystem::path& dir) const;
};

}  // namespace preheat
