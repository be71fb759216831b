#pragma once

namespace entroreg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace entroreg
