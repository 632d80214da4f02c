#pragma once

namespace garkit {

inline constexpr const char* version_string = "0.1.0";

} // namespace garkit
