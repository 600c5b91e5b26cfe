#pragma once

namespace mathforge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mathforge
