#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

namespace cmm {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;   // m/s
inline constexpr double kBoltzmann = 1.380649e-23;     // J/K
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;
inline constexpr double kRb87Mass = 86.909180527 * kAtomicMassUnit;

// Rate conventions used throughout:
//   *_hz      ordinary frequency (cycles/s)
//   *_rad_s   angular frequency or energy decay rate (rad/s)
// kappa and gamma are full energy-decay rates (FWHM in angular units).
inline constexpr double hz_to_rad(double hz) { return kTwoPi * hz; }
inline constexpr double rad_to_hz(double rad_s) { return rad_s / kTwoPi; }

/// Invalid input or configuration. CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure at runtime (solver breakdown, non-convergence). Exit code 1.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition)
        throw ValidationError(message);
}

} // namespace cmm
