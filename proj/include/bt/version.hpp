#pragma once

namespace bt {

inline constexpr const char* kToolName = "btrends";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace bt
