#pragma once

namespace tpi {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHbar = 1.054571817e-34;       // J s
inline constexpr double kSpeedOfLight = 299792458.0;   // m/s

// Model validity envelope for the matcher: |detuning| <= this many linewidths.
inline constexpr double kMatcherMaxDetuningGamma = 2.0;

}  // namespace tpi
