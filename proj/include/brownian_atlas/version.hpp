#pragma once

namespace brownian_atlas {

inline constexpr const char* kLibraryName = "brownian-atlas";
inline constexpr const char* kLibraryVersion = "0.1.0";

}  // namespace brownian_atlas
