#pragma once

namespace persona {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kToolName = "persona";

} // namespace persona
