#pragma once

namespace hammerpuf {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kLibraryVersion = "1.0.0";

}  // namespace hammerpuf
