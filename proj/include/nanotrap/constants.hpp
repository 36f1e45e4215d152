#pragma once

#include <numbers>

// SI-exact and CODATA 2018 constants. Atomic and material data are loaded at
// runtime (see atom_cs.hpp); only fundamental constants live here.
namespace nanotrap::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double c = 299792458.0;                 // m/s
inline constexpr double h = 6.62607015e-34;              // J s
inline constexpr double hbar = h / (2.0 * pi);
inline constexpr double e = 1.602176634e-19;             // C
inline constexpr double eps0 = 8.8541878128e-12;         // F/m
inline constexpr double mu0 = 1.25663706212e-6;          // N/A^2
inline constexpr double bohr_radius = 5.29177210903e-11; // m
inline constexpr double atomic_unit_polarizability = 1.64877727436e-41;  // C m^2 / V
inline constexpr double gauss = 1e-4;                    // T

}  // namespace nanotrap::constants
