#pragma once

#include <cmath>
#include <numbers>

// Unit conventions used throughout homsim.
//
// Frequencies, rates and Rabi couplings are stored as angular frequencies
// in rad/us.  A quantity quoted as "x MHz" (ordinary frequency) becomes
// 2*pi*x rad/us, so the numeric value is "MHz times 2 pi".  Times are
// nanoseconds at public interfaces and microseconds where they multiply
// rates; photon streams use integer picoseconds.

namespace homsim {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Bohr magneton over Planck constant, MHz per Gauss.
inline constexpr double kZeemanMhzPerGauss = 1.3996245;

constexpr double angular_from_mhz(double f_mhz) { return kTwoPi * f_mhz; }
constexpr double mhz_from_angular(double w) { return w / kTwoPi; }

constexpr double us_from_ns(double t_ns) { return 1e-3 * t_ns; }
constexpr double ns_from_us(double t_us) { return 1e3 * t_us; }
constexpr double ns_from_ps(double t_ps) { return 1e-3 * t_ps; }
constexpr double ps_from_ns(double t_ns) { return 1e3 * t_ns; }
constexpr double s_from_us(double t_us) { return 1e-6 * t_us; }

// Gaussian FWHM <-> standard deviation.
inline double sigma_from_fwhm(double fwhm) {
    return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

}  // namespace homsim
