#include "preheat/manifest.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include "preheat/errors.hpp"

namespace preheat {

namespace {

struct DigestContext {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

    DigestContext() {
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
            throw std::runtime_error("SHA-256 initialization failed");
        }
    }
    void update(const void* data, std::size_t size) {
        if (EVP_DigestUpdate(ctx.get(), data, size) != 1) throw std::runtime_error("SHA-256 update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
            throw std::runtime_error("SHA-256 finalization failed");
        }
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i) {
            out += digits[md[i] >> 4];
            out += digits[md[i] & 15];
        }
        return out;
    }
};

void fsync_path(const std::filesystem::path& path) {
    const int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    DigestContext d;
    d.update(bytes.data(), bytes.size());
    return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    DigestContext d;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return d.hex();
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["version"] = version;
    j["status"] = status;
    j["started"] = started;
    j["finished"] = finished;
    j["master_seed"] = master_seed;
    j["config"] = config;
    j["derived"] = derived;
    j["metadata"] = metadata;
    if (!failure.is_null()) j["failure"] = failure;
    auto& f = j["files"] = nlohmann::ordered_json::array();
    for (const FileRecord& r : files) {
        f.push_back({{"name", r.name}, {"sha256", r.sha256}, {"bytes", r.bytes}});
    }
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::ordered_json& j) {
    RunManifest m;
    try {
        m.command = j.at("command").get<std::string>();
        m.version = j.value("version", "");
        m.status = j.value("status", "");
        m.started = j.value("started", "");
        m.finished = j.value("finished", "");
        m.master_seed = j.value("master_seed", std::uint64_t{0});
        m.config = j.at("config").get<std::string>();
        if (j.contains("derived")) m.derived = j["derived"];
        if (j.contains("metadata")) m.metadata = j["metadata"];
        if (j.contains("failure")) m.failure = j["failure"];
        if (j.contains("files")) {
            for (const auto& f : j["files"]) {
                m.files.push_back({f.at("name").get<std::string>(), f.at("sha256").get<std::string>(),
                                   f.value("bytes", std::uintmax_t{0})});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

void RunManifest::write(const std::filesystem::path& path) const {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << to_json().dump(2) << '\n';
        out.flush();
        if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    fsync_path(tmp);
    std::filesystem::rename(tmp, path);
    if (path.has_parent_path()) fsync_path(path.parent_path());
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest '" + path.string() + "'");
    try {
        return from_json(nlohmann::ordered_json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void RunManifest::record_file(const std::filesystem::path& dir, const std::string& name) {
    const auto path = dir / name;
    FileRecord rec{name, sha256_file(path), std::filesystem::file_size(path)};
    for (FileRecord& r : files) {
        if (r.name == name) {
            r = rec;
            return;
        }
    }
    files.push_back(rec);
}

std::string RunManifest::verify(const std::filesystem::path& dir) const {
    for (const FileRecord& r : files) {
        const auto path = dir / r.name;
        if (!std::filesystem::exists(path)) return r.name + " is missing";
        if (sha256_file(path) != r.sha256) return r.name + " does not match its checksum";
    }
    return {};
}

}  // namespace preheat
