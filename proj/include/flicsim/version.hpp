#pragma once

namespace flicsim {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kProjectName = "flicsim";

}  // namespace flicsim
