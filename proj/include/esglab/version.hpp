#pragma once

namespace esglab {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace esglab
