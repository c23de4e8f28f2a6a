#pragma once

namespace chunkseam {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace chunkseam
