#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fluxrelax/dynamics.hpp"
#include "fluxrelax/hamiltonian.hpp"
#include "fluxrelax/loss_models.hpp"
#include "fluxrelax/resonator.hpp"

namespace fluxrelax {

/// Everything known about one qubit: circuit, resonator, and noise environment.
struct DeviceModel {
  std::string qubit_id;
  std::string process_label;
  FluxoniumParams params;
  ResonatorParams res;
  Environment env;
  std::optional<double> junction_area;  // um^2
};

struct T1Record {
  double phi_ext = 0.0;
  std::optional<double> omega01;  // Hz
  double t1 = 0.0;                // s
  std::optional<double> t1_err;   // s
  std::size_t n_binned = 1;
};

struct T1Dataset {
  std::string qubit_id;
  std::vector<T1Record> records;
};

/// Drops records whose error bar exceeds twice the value. Returns the number dropped.
std::size_t apply_ingest_rule(T1Dataset& ds);

/// Computes omega01 for records that lack it.
void fill_frequencies(T1Dataset& ds, const FluxoniumParams& params,
                      const DiagonalizeOptions& options = {});

/// Averages records sharing a frequency bin [k w, (k+1) w). Merged records carry
/// the mean frequency, mean T1 and the mean folded flux; their error is dropped.
T1Dataset bin_average(const T1Dataset& ds, double bin_width = 8e6);

inline const std::vector<Mechanism> kNonCapacitive = {Mechanism::flux_noise, Mechanism::charge_line,
                                                      Mechanism::flux_line, Mechanism::purcell};
inline const std::vector<Mechanism> kDefaultMechanisms = {Mechanism::capacitive, Mechanism::flux_noise,
                                                        Mechanism::charge_line, Mechanism::flux_line,
                                                        Mechanism::purcell};

enum class ExclusionMode { multilevel, two_level };

struct ExclusionOptions {
  double threshold = 0.1;
  ExclusionMode mode = ExclusionMode::multilevel;
  T1Options t1;
};

struct ExclusionResult {
  T1Dataset kept;
  T1Dataset dropped;
  /// Predicted non-capacitive rate over measured rate, per input record.
  std::vector<double> ratio;
};

/// Removes records where flux noise, drive lines and Purcell loss together
/// account for more than `threshold` of the measured decay rate.
ExclusionResult exclusion_filter(const T1Dataset& ds, const DeviceModel& device,
                                 const ExclusionOptions& options = {});

struct ReadoutScreenOptions {
  /// Minimum |chi1 - chi0| as a fraction of the resonator linewidth.
  double min_contrast = 0.5;
  T1Options t1;
};

struct ReadoutScreenResult {
  T1Dataset kept;
  T1Dataset dropped;
};

/// Drops records the dispersive readout could not have measured: a transition
/// inside the resonator guard band, or |chi1 - chi0| below min_contrast * kappa.
ReadoutScreenResult readout_screen(const T1Dataset& ds, const DeviceModel& device,
                                   const ReadoutScreenOptions& options = {});

struct ExtractionOptions {
  T1Mode mode = T1Mode::multilevel_signal;
  T1Options t1;
  std::vector<Mechanism> mechanisms = kDefaultMechanisms;
  double initial_qc = 3e5;
  double initial_spread = 0.5;
  /// Stop once the simplex spans less than this relative range of qc_eff.
  double rel_tolerance = 1e-4;
  std::size_t max_iterations = 500;
};

/// Nelder-Mead inversion of a measured T1 into qc_eff (log10 parameterized).
double extract_qceff(const T1Model& model, double t1, const ExtractionOptions& options = {});

double extract_qceff(const T1Record& record, const DeviceModel& device,
                     const ExtractionOptions& options = {});

/// Algebraic inversion of the two-level rate sum.
double extract_qceff_closed_form(const T1Model& model, double t1);

struct QceffEntry {
  double freq = 0.0;  // Hz
  double qceff = 0.0;
  std::size_t n_binned = 1;
  double phi_ext = 0.0;
};

struct QceffDistribution {
  std::string qubit_id;
  double epsilon_used = 0.0;
  std::vector<QceffEntry> entries;

  std::vector<double> values() const;
};

/// Extracts qc_eff for every record (records need omega01 or it is recomputed).
QceffDistribution extract_distribution(const T1Dataset& ds, const DeviceModel& device,
                                       const ExtractionOptions& options = {});

struct QubitInputs {
  DeviceModel device;
  T1Dataset data;
};

struct EpsilonFit {
  double epsilon = 0.0;
  std::vector<double> grid;
  std::vector<double> variance;
};

struct EpsilonGrid {
  double lo = -1.0;
  double hi = 1.0;
  double step = 0.05;
};

/// Picks the epsilon minimizing the pooled variance of log10(q) - log10(mean q).
EpsilonFit fit_epsilon_global(std::span<const QubitInputs> qubits,
                              const ExtractionOptions& options = {}, const EpsilonGrid& grid = {});

struct DephasingRecord {
  double phi_ext = 0.0;
  double gamma_phi_e = 0.0;     // 1/s
  std::optional<double> slope;  // rad/s per Phi0
};

struct DephasingDataset {
  std::string qubit_id;
  std::vector<DephasingRecord> records;
};

struct FluxNoiseFit {
  double sqrt_a_phi = 0.0;  // Phi0 / sqrt(Hz)
  std::size_t n_used = 0;
  std::size_t n_sweet_spot = 0;
};

/// Through-origin fit of the echo dephasing rate against |d omega01 / d phi|.
FluxNoiseFit extract_flux_noise_amplitude(const DephasingDataset& ds, const FluxoniumParams& params);

struct DistributionSummary {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;
  double iqr = 0.0;
  std::size_t n = 0;
};

/// Mean, median, sample standard deviation and interquartile range
/// (linearly interpolated quartiles). A single value is an error unless
/// `allow_singleton`, in which case std is 0.
DistributionSummary summarize(std::span<const double> values, bool allow_singleton = false);

/// Linear-interpolation quantile of sorted data, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

inline constexpr double kJunctionSpecificCapacitance = 49e-15;  // F / um^2

/// Fraction of the qubit capacitance contributed by the junction.
double jj_participation(double junction_area, double c_sigma,
                        double specific_capacitance = kJunctionSpecificCapacitance);

/// Junction quality factor given qc_eff and the quality of everything else.
double map_qjj(double qceff, double p_jj,
               double q_other = std::numeric_limits<double>::infinity());

}  // namespace fluxrelax
