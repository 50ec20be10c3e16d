#pragma once

namespace xrsim {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace xrsim
