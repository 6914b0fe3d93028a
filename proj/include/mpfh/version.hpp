#pragma once

namespace mpfh {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mpfh
