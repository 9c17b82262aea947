// constants.hpp - physical constants and unit conventions.
//
// Internal rate convention: angular frequency (rad/s) everywhere. Anything
// user-facing in ordinary frequency carries an explicit _hz / _over_2pi
// suffix. Times in seconds, lengths in the unit named by the signature.

#pragma once

#include <cmath>
#include <numbers>

namespace lambdamem {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA / exact SI values.
inline constexpr double kPlanck = 6.62607015e-34;        // J s (exact)
inline constexpr double kHbar = 1.054571817e-34;         // J s
inline constexpr double kBoltzmann = 1.380649e-23;       // J/K (exact)
inline constexpr double kSpeedOfLight = 299792458.0;     // m/s (exact)
inline constexpr double kElectronVolt = 1.602176634e-19; // J (exact)

// FWHM duration x FWHM bandwidth for a Fourier-limited Gaussian intensity
// profile: 2 ln2 / pi ~ 0.4413.
inline const double kGaussianTbp = 2.0 * std::numbers::ln2 / std::numbers::pi;

// Factor in the EIT control condition Omega^2 = d Gamma B_sig / k, chosen
// as 2x the Gaussian time-bandwidth product so that the group delay equals
// exactly twice the signal duration. Commonly rounded to 0.88.
inline const double kEitConditionFactor = 2.0 * kGaussianTbp;

inline double mev_to_hz(double mev) {
  return mev * 1e-3 * kElectronVolt / kPlanck;
}

inline double invcm_to_hz(double wavenumber_invcm) {
  return wavenumber_invcm * 100.0 * kSpeedOfLight;
}

} // namespace lambdamem
