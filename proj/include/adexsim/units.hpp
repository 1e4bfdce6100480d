#pragma once

// Scale factors to SI base units. All quantities inside the library are
// plain doubles in SI (V, A, F, S, s, ohm); write `20 * units::us` at call
// sites rather than bare literals.
namespace adexsim::units {

inline constexpr double V = 1.0;
inline constexpr double mV = 1e-3;
inline constexpr double A = 1.0;
inline constexpr double uA = 1e-6;
inline constexpr double nA = 1e-9;
inline constexpr double pA = 1e-12;
inline constexpr double F = 1.0;
inline constexpr double pF = 1e-12;
inline constexpr double S = 1.0;
inline constexpr double uS = 1e-6;
inline constexpr double nS = 1e-9;
inline constexpr double s = 1.0;
inline constexpr double ms = 1e-3;
inline constexpr double us = 1e-6;
inline constexpr double ohm = 1.0;
inline constexpr double kohm = 1e3;
inline constexpr double Mohm = 1e6;

} // namespace adexsim::units
