#pragma once

namespace esc {

#ifdef ESC_VERSION
inline constexpr const char* kVersion = ESC_VERSION;
#else
inline constexpr const char* kVersion = "unknown";
#endif

}  // namespace esc
