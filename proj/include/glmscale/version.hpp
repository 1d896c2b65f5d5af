#pragma once

namespace glmscale {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace glmscale
