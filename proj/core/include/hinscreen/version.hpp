#pragma once

namespace hinscreen {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hinscreen
