#pragma once

#include <numbers>

namespace mtjrng::phys {

// CODATA 2018 (exact where the SI defines them).
inline constexpr double kBoltzmann = 1.380649e-23;        // J/K
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kHbar = 1.054571817e-34;          // J s
inline constexpr double kMu0 = 1.25663706212e-6;          // T m / A
inline constexpr double kGammaElectron = 1.76085963023e11;  // rad / (s T)
inline constexpr double kPi = std::numbers::pi;

/// Thermal voltage k_B T / e.
constexpr double thermal_voltage(double temperature) {
  return kBoltzmann * temperature / kElementaryCharge;
}

}  // namespace mtjrng::phys
