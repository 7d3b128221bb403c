#pragma once

namespace covseg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace covseg
