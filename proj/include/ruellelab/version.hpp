#pragma once

namespace ruellelab {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace ruellelab
