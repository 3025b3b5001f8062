#pragma once

#include <numbers>

namespace ionlattice::units {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHbar = 1.054571817e-34;          // J s
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg

// Ordinary frequency (Hz) to angular frequency (rad/s) and back.
constexpr double angular(double hz) { return kTwoPi * hz; }
constexpr double ordinary(double rad_per_s) { return rad_per_s / kTwoPi; }

constexpr double angular_khz(double khz) { return angular(khz * 1e3); }
constexpr double to_khz(double rad_per_s) { return ordinary(rad_per_s) * 1e-3; }

constexpr double microseconds(double us) { return us * 1e-6; }
constexpr double to_microseconds(double s) { return s * 1e6; }

}  // namespace ionlattice::units
