#pragma once

namespace wavefilter {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wavefilter
