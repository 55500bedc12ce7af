#pragma once

namespace poreuq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace poreuq
