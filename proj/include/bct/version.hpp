#pragma once

namespace bct {

inline constexpr const char* version = "0.1.0";

}  // namespace bct
