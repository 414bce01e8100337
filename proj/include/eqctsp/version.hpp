#pragma once

namespace eqctsp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace eqctsp
