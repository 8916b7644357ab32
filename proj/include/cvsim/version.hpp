#pragma once

namespace cvsim {
inline constexpr const char* kVersion = "0.1.0";
}
