#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fluxrelax/constants.hpp"
#include "fluxrelax/hamiltonian.hpp"
#include "fluxrelax/resonator.hpp"

namespace fluxrelax {

/// Noise environment and loss-model parameters. SI units except where noted.
struct Environment {
  double t_qubit = 0.040;                  // K
  double t_res = 0.065;                    // K, used for Purcell emission only
  double a_phi = 0.0;                      // flux-noise power at 1 Hz, in Phi0^2
  double alpha = 1.0;                      // flux-noise exponent
  double x_qp = 0.0;                       // normalized quasiparticle density
  double gap = 44e9;                       // superconducting gap as frequency (Hz)
  double c_drive = 20e-18;                 // F
  double m_drive = constants::kFluxQuantum / 0.0215;  // Wb/A
  int n_array = 151;
  double qc_eff = 3e5;
  double epsilon = 0.25;

  void validate() const;
};

enum class Mechanism { capacitive, flux_noise, qp_junction, qp_array, charge_line, flux_line, purcell };

inline constexpr Mechanism kAllMechanisms[] = {
    Mechanism::capacitive, Mechanism::flux_noise,  Mechanism::qp_junction, Mechanism::qp_array,
    Mechanism::charge_line, Mechanism::flux_line, Mechanism::purcell};

std::string_view mechanism_name(Mechanism m);
std::optional<Mechanism> parse_mechanism(std::string_view name);

enum class QpSite { junction, array };
enum class DriveLine { charge, flux };

/// Directional rates rates(i, j) = Gamma_{i->j} (1/s) for one mechanism.
struct MechanismRateTable {
  Mechanism mechanism = Mechanism::capacitive;
  Eigen::MatrixXd rates;
};

/// Q'(f) = qc_eff (6 GHz / f)^epsilon.
double q_of_frequency(const Environment& env, double f);

/// Dielectric loss through the qubit capacitance, Gamma_{i->j}.
double rate_capacitive(const Spectrum& spec, const FluxoniumParams& params, const Environment& env,
                       std::size_t i, std::size_t j);

/// Classical 1/f^alpha flux noise; symmetric in i and j.
double rate_flux_noise(const Spectrum& spec, const FluxoniumParams& params, const Environment& env,
                       std::size_t i, std::size_t j);

/// Quasiparticle tunneling through the small junction or the inductor array.
double rate_quasiparticle(const Spectrum& spec, const FluxoniumParams& params,
                          const Environment& env, std::size_t i, std::size_t j, QpSite site);

/// Emission into the 50-ohm charge or flux drive line.
double rate_radiative(const Spectrum& spec, const FluxoniumParams& params, const Environment& env,
                      std::size_t i, std::size_t j, DriveLine line);

/// Mutual inductance between a quarter-wave resonator and the feedline that
/// reproduces the measured linewidth.
double feedline_mutual_inductance(const ResonatorParams& res);

/// Input impedance of the feedline-loaded quarter-wave resonator seen from the
/// qubit end, at frequency f (Hz).
std::complex<double> purcell_impedance(const ResonatorParams& res, double f);

/// Purcell emission through the readout resonator (uses t_res).
double rate_purcell(const Spectrum& spec, const FluxoniumParams& params, const ResonatorParams& res,
                    const Environment& env, std::size_t i, std::size_t j);

/// Fills every off-diagonal entry for one mechanism.
MechanismRateTable build_mechanism_table(const Spectrum& spec, const FluxoniumParams& params,
                                         const ResonatorParams& res, const Environment& env,
                                         Mechanism mechanism);

/// Gamma_{0->1} + Gamma_{1->0} for one mechanism.
double pair_rate(const Spectrum& spec, const FluxoniumParams& params, const ResonatorParams& res,
                 const Environment& env, Mechanism mechanism, std::size_t i = 0, std::size_t j = 1);

}  // namespace fluxrelax
