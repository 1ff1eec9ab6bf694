#pragma once

namespace randgreen {

inline constexpr const char* kVersion = "randgreen 0.1.0";

}  // namespace randgreen
