#pragma once

#include <numbers>

namespace nfqed {

/// SI physical constants (CODATA 2018). Every module reads them from here.
struct PhysicalConstants {
    static constexpr double c = 299792458.0;             // m/s
    static constexpr double eps0 = 8.8541878128e-12;     // F/m
    static constexpr double mu0 = 1.25663706212e-6;      // H/m
    static constexpr double hbar = 1.054571817e-34;      // J s
};

inline constexpr double pi = std::numbers::pi;

inline constexpr double omega_from_wavelength(double lambda_m) {
    return 2.0 * pi * PhysicalConstants::c / lambda_m;
}

inline constexpr double wavelength_from_omega(double omega) {
    return 2.0 * pi * PhysicalConstants::c / omega;
}

inline constexpr double wavenumber(double omega) { return omega / PhysicalConstants::c; }

}  // namespace nfqed
