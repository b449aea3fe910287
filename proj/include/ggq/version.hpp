#pragma once

namespace ggq {
inline constexpr const char* kVersion = "0.1.0";
}
