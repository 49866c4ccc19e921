#pragma once

namespace haloscan::constants {

inline constexpr double planck = 6.62607015e-34;       // J s
inline constexpr double boltzmann = 1.380649e-23;      // J / K
inline constexpr double speed_of_light_kms = 299792.458;

// Vacuum noise in the single-quadrature convention used throughout: 1/4 quanta.
inline constexpr double vacuum_quanta = 0.25;

}  // namespace haloscan::constants
