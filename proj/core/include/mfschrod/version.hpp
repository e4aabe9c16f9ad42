#pragma once

namespace mfs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mfs
