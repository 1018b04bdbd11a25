#ifndef EITFLOW_CONSTANTS_HPP
#define EITFLOW_CONSTANTS_HPP

#include <numbers>

namespace eitflow::constants {

// CODATA 2018 exact / recommended values, SI.
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double speed_of_light = 299792458.0;          // m/s
inline constexpr double planck = 6.62607015e-34;               // J s
inline constexpr double hbar = planck / two_pi;                // J s
inline constexpr double boltzmann = 1.380649e-23;              // J/K
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

}  // namespace eitflow::constants

#endif
