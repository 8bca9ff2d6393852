#pragma once

namespace gbcm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gbcm
