#pragma once

#include <numbers>

namespace fluxrelax::constants {

// SI values (exact since the 2019 redefinition).
inline constexpr double kPlanck = 6.62607015e-34;           // J s
inline constexpr double kHbar = kPlanck / (2.0 * std::numbers::pi);
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kBoltzmann = 1.380649e-23;           // J/K
inline constexpr double kFluxQuantum = kPlanck / (2.0 * kElementaryCharge);  // Wb

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Reference frequency of the frequency-dependent capacitive quality factor.
inline constexpr double kQcReferenceHz = 6.0e9;

}  // namespace fluxrelax::constants
