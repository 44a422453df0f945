#pragma once

namespace otlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace otlab
