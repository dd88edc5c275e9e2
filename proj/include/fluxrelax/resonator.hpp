#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fluxrelax/hamiltonian.hpp"

namespace fluxrelax {

/// Readout resonator seen by the qubit. Frequencies are linear (Hz).
struct ResonatorParams {
  double omega_res = 0.0;
  double g = 0.0;
  double kappa = 0.0;
  double z0 = 50.0;

  void validate() const;
  /// Loaded quality factor omega_res / kappa.
  double q_res() const { return omega_res / kappa; }
};

struct DressedResponse {
  std::vector<double> chi;
  std::vector<std::complex<double>> s21_points;
  double rotation_angle = 0.0;
};

struct Rotation {
  double angle = 0.0;
  std::vector<std::complex<double>> points;
};

/// Default half-width of the forbidden window around the resonator (Hz).
inline constexpr double kDefaultGuardBand = 1e3;

/// State-dependent resonator pull chi_i (Hz), summed over every retained level.
/// Throws ResonanceCollision if any transition out of `state` lies within
/// `guard_band` of the resonator.
double dispersive_shift(const Spectrum& spec, const ResonatorParams& res, std::size_t state,
                        double guard_band = kDefaultGuardBand);

/// chi_i for every level of the spectrum.
std::vector<double> dispersive_shifts(const Spectrum& spec, const ResonatorParams& res,
                                      double guard_band = kDefaultGuardBand);

/// Transmission of a notch-type resonator with equal loaded and coupling Q,
/// dressed by chi_i and probed at `probe` (Hz).
std::complex<double> s21(const ResonatorParams& res, double chi_i, double probe);

/// Global phase rotation maximizing |Re p0 - Re p1|. The returned angle lies in
/// [0, pi); the tie at pi/2 vs 0 resolves to the smaller angle.
Rotation rotate_for_contrast(std::span<const std::complex<double>> points);

/// Per-state S21 at the ground-state-dressed probe, rotated for contrast.
DressedResponse dressed_response(const Spectrum& spec, const ResonatorParams& res,
                                 double guard_band = kDefaultGuardBand);

/// Qubit-resonator coupling capacitance (F) implied by g and the total qubit
/// capacitance.
double coupling_capacitance(const ResonatorParams& res, double c_sigma);

}  // namespace fluxrelax
