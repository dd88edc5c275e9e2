#pragma once

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fluxrelax/hamiltonian.hpp"
#include "fluxrelax/loss_models.hpp"
#include "fluxrelax/resonator.hpp"

namespace fluxrelax {

/// Generator B of dp/dt = B p, with b(j, i) = Gamma_{i->j} and columns summing
/// to zero, together with its eigendecomposition.
class RateMatrix {
 public:
  explicit RateMatrix(Eigen::MatrixXd b);

  std::size_t n() const noexcept { return static_cast<std::size_t>(b_.rows()); }
  const Eigen::MatrixXd& b() const noexcept { return b_; }
  /// Eigenvalues gamma_i (nonpositive real parts); index stationary_index() is ~0.
  const Eigen::VectorXcd& eigenvalues() const noexcept { return values_; }
  /// Unit-norm eigenvectors as columns.
  const Eigen::MatrixXcd& eigenvectors() const noexcept { return vectors_; }
  std::size_t stationary_index() const noexcept { return stationary_; }
  /// Stationary distribution, normalized to unit 1-norm.
  Eigen::VectorXd stationary() const;
  /// Mode coefficients c = V^{-1} p.
  Eigen::VectorXcd coefficients(const Eigen::VectorXd& p) const;
  /// Largest |rate| in the generator.
  double max_rate() const noexcept { return max_rate_; }

 private:
  Eigen::MatrixXd b_;
  Eigen::VectorXcd values_;
  Eigen::MatrixXcd vectors_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  std::size_t stationary_ = 0;
  double max_rate_ = 0.0;
};

/// Sums directional rate tables into a generator.
RateMatrix build_rate_matrix(std::span<const MechanismRateTable> tables);

/// Boltzmann occupations of the spectrum's levels at temperature T (K).
Eigen::VectorXd thermal_population(const Spectrum& spec, double temperature);

/// Swaps the populations of levels 0 and 1.
Eigen::VectorXd invert_computational(Eigen::VectorXd p);

struct PopulationTrace {
  std::vector<double> times;
  Eigen::MatrixXd populations;  // one row per time
  Eigen::VectorXd initial;
  /// Set when some row drifted from unit sum by more than 1e-9 and was rescaled.
  bool renormalized = false;

  Eigen::VectorXd level(std::size_t i) const { return populations.col(static_cast<Eigen::Index>(i)); }
};

PopulationTrace evolve(const RateMatrix& rm, const Eigen::VectorXd& p0, std::span<const double> times);

struct DecayFit {
  double t1 = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double residual_rms = 0.0;
};

/// Least-squares fit of A exp(-t / T1) + C.
DecayFit fit_exponential(std::span<const double> times, std::span<const double> signal);

struct TimeGridOptions {
  std::size_t points = 51;
  double start_factor = 1.0 / 50.0;
  double stop_factor = 8.0;
};

/// Log-spaced delays spanning the decay of the mode that dominates p0.
std::vector<double> decay_time_grid(const RateMatrix& rm, const Eigen::VectorXd& p0,
                                    const TimeGridOptions& options = {});

struct SignalTrace {
  PopulationTrace populations;
  std::vector<double> signal;
  DressedResponse response;
};

/// Evolves the inverted thermal state and forms s(t) = |sum_i p_i(t) Re S21_rot,i|.
/// `spec` may hold more levels than the generator; the extra levels only enter
/// the dispersive shifts.
SignalTrace simulate_t1_signal(const RateMatrix& rm, const Spectrum& spec, const ResonatorParams& res,
                               const Environment& env, std::span<const double> times,
                               double guard_band = kDefaultGuardBand);

struct ExponentialnessReport {
  double m = 0.0;
  Eigen::VectorXd delta;
  std::size_t dominant_index = 0;
  double dominant_rate = 0.0;
};

/// Part of p0 outside the stationary and most-overlapping decay modes.
ExponentialnessReport exponentialness(const RateMatrix& rm, const Eigen::VectorXd& p0);

struct MisassignmentError {
  double to_ground = 0.0;
  double to_excited = 0.0;
  double t1 = 0.0;
  double t1_to_excited = 0.0;
};

/// Relative T1 error when leaked population is read out as 0 or as 1.
MisassignmentError heralded_misassignment_error(const RateMatrix& rm, const Spectrum& spec,
                                                const Environment& env, std::span<const double> times);

struct SignalError {
  double t1_population = 0.0;
  double t1_signal = 0.0;
  /// (T1_population - T1_signal) / T1_population
  double relative = 0.0;
};

SignalError dispersive_signal_error(const RateMatrix& rm, const Spectrum& spec,
                                    const ResonatorParams& res, const Environment& env,
                                    std::span<const double> times);

enum class T1Mode { two_level, multilevel_population, multilevel_signal };

struct T1Options {
  std::size_t n_levels = 6;
  /// Levels kept in the dispersive-shift sum (at least n_levels).
  std::size_t chi_levels = 10;
  TimeGridOptions grid;
  double guard_band = kDefaultGuardBand;
  DiagonalizeOptions diagonalize;
};

/// Loss model of one qubit at one flux point, prepared for repeated T1
/// evaluation at varying qc_eff. Capacitive rates scale exactly as 1/qc_eff.
class T1Model {
 public:
  T1Model(const FluxoniumParams& params, const ResonatorParams& res, const Environment& env,
          FluxBias bias, std::span<const Mechanism> mechanisms, const T1Options& options = {});

  double t1(double qc_eff, T1Mode mode) const;
  double t1(T1Mode mode) const { return t1(env_.qc_eff, mode); }
  RateMatrix rate_matrix(double qc_eff) const;

  /// 0<->1 pair rate of the capacitive mechanism at qc_eff = 1 (zero if excluded).
  double capacitive_unit_pair_rate() const;
  /// 0<->1 pair rate summed over the non-capacitive mechanisms.
  double other_pair_rate() const;
  bool has_capacitive() const noexcept { return has_capacitive_; }

  /// Re-evaluates the capacitive rates for a new frequency exponent.
  void set_epsilon(double epsilon);

  const Spectrum& spectrum() const noexcept { return spec_; }
  const Environment& environment() const noexcept { return env_; }
  double omega01() const { return spec_.transition_frequency(0, 1); }

 private:
  Eigen::MatrixXd total_rates(double qc_eff) const;

  FluxoniumParams params_;
  ResonatorParams res_;
  Environment env_;
  T1Options options_;
  Spectrum spec_;       // n_levels
  Spectrum chi_spec_;   // chi_levels, only when a signal is needed
  bool has_capacitive_ = false;
  Eigen::MatrixXd capacitive_flat_;  // qc_eff = 1, epsilon = 0
  Eigen::MatrixXd capacitive_unit_;  // qc_eff = 1, current epsilon
  Eigen::MatrixXd other_;
  std::vector<double> readout_;  // Re S21_rot per level
  bool readout_ready_ = false;
  std::exception_ptr readout_error_;
};

/// T1 of one configuration under the chosen description.
double predicted_t1(const FluxoniumParams& params, const ResonatorParams& res, const Environment& env,
                    FluxBias bias, T1Mode mode, std::span<const Mechanism> mechanisms,
                    const T1Options& options = {});

}  // namespace fluxrelax
