#pragma once

namespace risloc {

inline constexpr const char* version_string = "0.1.0";

} // namespace risloc
