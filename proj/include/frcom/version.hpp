#pragma once

namespace frcom {
inline constexpr const char* kVersion = "0.1.0";
} // namespace frcom
