#pragma once

namespace clrl {
inline constexpr const char* kVersion = "0.1.0";
}
