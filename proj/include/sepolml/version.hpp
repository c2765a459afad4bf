#pragma once

namespace sepolml {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace sepolml
