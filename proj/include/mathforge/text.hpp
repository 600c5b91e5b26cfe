#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace mathforge {

std::string_view trim(std::string_view s);

// Runs of whitespace become a single space; leading/trailing whitespace dropped.
std::string collapse_whitespace(std::string_view s);

// Number of UTF-8 code points (continuation bytes are not counted).
std::size_t utf8_length(std::string_view s);

bool contains(std::string_view haystack, std::string_view needle);

// 64-bit FNV-1a. Used to derive per-request seeds from string tags.
unsigned long long fnv1a64(std::string_view s);

// Deterministic non-negative seed mixing a base seed with a string tag.
long long derive_seed(long long base_seed, std::string_view tag);

}  // namespace mathforge
