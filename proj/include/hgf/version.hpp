#pragma once

namespace hgf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hgf
