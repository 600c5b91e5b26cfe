#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace mathforge {

// Hex-encoded SHA-256 digest of a byte string.
std::string sha256_hex(std::string_view data);

// Digest of a file's bytes. Throws std::runtime_error when the file cannot be read.
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace mathforge
