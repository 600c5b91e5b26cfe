#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace mathforge {

// Provenance record written alongside command outputs: what ran, over which
// input bytes, producing which output bytes. A manifest left with
// complete = false marks an interrupted run.
class RunManifest {
public:
    RunManifest(std::string command, std::string config_digest);

    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);

    // Writes with complete = false; call again via finish() when done.
    void write(const std::filesystem::path& path) const;
    void finish(const std::filesystem::path& path);

    const std::map<std::string, std::string>& outputs() const { return outputs_; }

private:
    nlohmann::ordered_json to_json() const;

    std::string command_;
    std::string config_digest_;
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
    std::string started_at_;
    std::string finished_at_;
    bool complete_ = false;
};

// Current UTC time as ISO 8601 (seconds resolution).
std::string iso8601_utc_now();

}  // namespace mathforge
