#pragma once

namespace poincare {

inline constexpr const char* kVersion = "0.1.0";

} // namespace poincare
