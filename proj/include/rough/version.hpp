#pragma once

namespace rough {
inline constexpr const char* kLibraryVersion = "0.1.0";
}
