#pragma once

#include <numbers>

namespace sqz {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s
inline constexpr double kPi = std::numbers::pi;

} // namespace sqz
