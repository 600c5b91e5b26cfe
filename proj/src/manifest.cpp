#include "mathforge/manifest.hpp"

#include <ctime>
#include <fstream>

#include "mathforge/sha256.hpp"
#include "mathforge/version.hpp"

namespace mathforge {

namespace fs = std::filesystem;

std::string iso8601_utc_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RunManifest::RunManifest(std::string command, std::string config_digest)
    : command_(std::move(command)),
      config_digest_(std::move(config_digest)),
      started_at_(iso8601_utc_now()) {}

void RunManifest::add_input(const fs::path& path) {
    inputs_[path.filename().string()] = sha256_file_hex(path);
}

void RunManifest::add_output(const fs::path& path) {
    outputs_[path.filename().string()] = sha256_file_hex(path);
}

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["tool_version"] = kVersion;
    j["config_digest"] = config_digest_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["started_at"] = started_at_;
    j["finished_at"] = finished_at_;
    j["complete"] = complete_;
    return j;
}

void RunManifest::write(const fs::path& path) const {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    out << to_json().dump(2) << "\n";
}

void RunManifest::finish(const fs::path& path) {
    finished_at_ = iso8601_utc_now();
    complete_ = true;
    write(path);
}

}  // namespace mathforge
