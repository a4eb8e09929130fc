#pragma once

#include <complex>
#include <numbers>

namespace cmaw {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kC0 = 299792458.0;           // m/s
inline constexpr double kMu0 = 4.0e-7 * kPi;         // H/m
inline constexpr double kEps0 = 1.0 / (kMu0 * kC0 * kC0);
inline constexpr double kEta0 = kMu0 * kC0;          // ohm

inline constexpr double wavenumber(double frequency_hz) { return 2.0 * kPi * frequency_hz / kC0; }
inline constexpr double wavelength(double frequency_hz) { return kC0 / frequency_hz; }

}  // namespace cmaw
