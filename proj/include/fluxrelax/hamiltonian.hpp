#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fluxrelax {

/// Circuit energies of the fluxonium, all as linear frequencies (E/h, Hz).
struct FluxoniumParams {
  double ej = 0.0;
  double ec = 0.0;
  double el = 0.0;

  void validate() const;
  /// Total shunt capacitance implied by the charging energy, C = e^2 / (2 h ec).
  double c_sigma() const;
};

/// External flux through the qubit loop in units of the flux quantum.
struct FluxBias {
  double phi_ext = 0.0;
};

/// Options controlling the truncated-basis diagonalization.
struct DiagonalizeOptions {
  std::size_t basis_dim = 120;
  std::size_t basis_step = 20;
  std::size_t max_basis_dim = 400;
  /// Relative energy change between successive bases accepted as converged.
  double tolerance = 1e-9;
};

/// Low-lying eigensystem of the fluxonium Hamiltonian.
///
/// Energies are ascending eigenvalues as frequencies (Hz). Matrix elements are
/// expressed in the energy eigenbasis returned by the solver; their phases are
/// gauge dependent, magnitudes are not.
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(Eigen::VectorXd energies, Eigen::MatrixXcd n_elem, Eigen::MatrixXd phi_elem,
           Eigen::MatrixXd sin_half_elem, std::size_t basis_dim, double phi_ext);

  std::size_t n_levels() const noexcept { return static_cast<std::size_t>(energies_.size()); }
  std::size_t basis_dim() const noexcept { return basis_dim_; }
  double phi_ext() const noexcept { return phi_ext_; }

  const Eigen::VectorXd& energies() const noexcept { return energies_; }
  const Eigen::MatrixXcd& n_elem() const noexcept { return n_elem_; }
  const Eigen::MatrixXd& phi_elem() const noexcept { return phi_elem_; }
  const Eigen::MatrixXd& sin_half_elem() const noexcept { return sin_half_elem_; }

  /// Signed transition frequency E_j - E_i (Hz).
  double transition_frequency(std::size_t i, std::size_t j) const;

  /// Leading `n` levels of this spectrum.
  Spectrum truncated(std::size_t n) const;

 private:
  Eigen::VectorXd energies_;
  Eigen::MatrixXcd n_elem_;
  Eigen::MatrixXd phi_elem_;
  Eigen::MatrixXd sin_half_elem_;
  std::size_t basis_dim_ = 0;
  double phi_ext_ = 0.0;
};

/// Diagonalizes H = 4 Ec n^2 - Ej cos(phi) + El/2 (phi - 2 pi phi_ext)^2 in the
/// oscillator basis of its linear part, growing the basis until the retained
/// energies stop moving. Throws ConvergenceError when `max_basis_dim` is hit.
Spectrum diagonalize(const FluxoniumParams& params, FluxBias bias, std::size_t n_levels,
                     const DiagonalizeOptions& options = {});

/// Single diagonalization at a fixed basis size, with no convergence check.
Spectrum diagonalize_fixed(const FluxoniumParams& params, FluxBias bias, std::size_t n_levels,
                           std::size_t basis_dim);

/// Signed transition frequency E_j - E_i (Hz).
double transition_frequency(const Spectrum& spec, std::size_t i, std::size_t j);

/// d(omega_01)/d(phi_ext) in rad/s per flux quantum, from Hellmann-Feynman.
double flux_dispersion(const FluxoniumParams& params, FluxBias bias,
                       const DiagonalizeOptions& options = {});

/// Same quantity from an existing spectrum (needs the El that produced it).
double flux_dispersion(const Spectrum& spec, const FluxoniumParams& params);

/// One spectrum per flux point, in grid order. Failures are rethrown as
/// SweepError carrying the grid index.
std::vector<Spectrum> spectrum_vs_flux(const FluxoniumParams& params, std::span<const FluxBias> grid,
                                       std::size_t n_levels, const DiagonalizeOptions& options = {});

/// Folds a flux bias into [0, 0.5] using periodicity and reflection symmetry.
double fold_flux(double phi_ext);

}  // namespace fluxrelax
