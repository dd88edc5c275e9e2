#include "fluxrelax/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "fluxrelax/errors.hpp"
#include "fluxrelax/optimize.hpp"
#include "fluxrelax/parallel.hpp"

namespace fluxrelax {

std::size_t apply_ingest_rule(T1Dataset& ds) {
  const auto before = ds.records.size();
  std::erase_if(ds.records, [](const T1Record& r) { return r.t1_err && *r.t1_err > 2.0 * r.t1; });
  return before - ds.records.size();
}

void fill_frequencies(T1Dataset& ds, const FluxoniumParams& params, const DiagonalizeOptions& options) {
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (!ds.records[i].omega01) missing.push_back(i);
  }
  parallel_for(missing.size(), [&](std::size_t k) {
    T1Record& r = ds.records[missing[k]];
    r.omega01 = diagonalize(params, {r.phi_ext}, 2, options).transition_frequency(0, 1);
  });
}

T1Dataset bin_average(const T1Dataset& ds, double bin_width) {
  if (!(bin_width > 0.0)) throw InvalidArgument("bin width must be positive");
  std::map<long long, std::vector<const T1Record*>> bins;
  for (const auto& r : ds.records) {
    if (!r.omega01) throw DataError("binning needs omega01 for every record");
    bins[static_cast<long long>(std::floor(*r.omega01 / bin_width))].push_back(&r);
  }
  T1Dataset out;
  out.qubit_id = ds.qubit_id;
  for (const auto& [key, members] : bins) {
    if (members.size() == 1) {
      out.records.push_back(*members.front());
      continue;
    }
    T1Record merged;
    double f = 0.0, t1 = 0.0, phi = 0.0;
    std::size_t count = 0;
    for (const T1Record* r : members) {
      f += *r->omega01;
      t1 += r->t1;
      phi += fold_flux(r->phi_ext);
      count += r->n_binned;
    }
    const double n = static_cast<double>(members.size());
    merged.omega01 = f / n;
    merged.t1 = t1 / n;
    merged.phi_ext = phi / n;
    merged.n_binned = count;
    out.records.push_back(merged);
  }
  return out;
}

ExclusionResult exclusion_filter(const T1Dataset& ds, const DeviceModel& device,
                                 const ExclusionOptions& options) {
  ExclusionResult out;
  out.kept.qubit_id = ds.qubit_id;
  out.dropped.qubit_id = ds.qubit_id;
  out.ratio.assign(ds.records.size(), 0.0);
  parallel_for(ds.records.size(), [&](std::size_t i) {
    const T1Record& r = ds.records[i];
    const T1Model model(device.params, device.res, device.env, {r.phi_ext}, kNonCapacitive, options.t1);
    const double pair = model.other_pair_rate();
    double rate = 0.0;
    if (pair > 0.0) {
      rate = options.mode == ExclusionMode::two_level
                 ? pair
                 : 1.0 / model.t1(T1Mode::multilevel_population);
    }
    out.ratio[i] = rate * r.t1;
  });
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    (out.ratio[i] > options.threshold ? out.dropped : out.kept).records.push_back(ds.records[i]);
  }
  return out;
}

ReadoutScreenResult readout_screen(const T1Dataset& ds, const DeviceModel& device,
                                   const ReadoutScreenOptions& options) {
  if (!(options.min_contrast >= 0.0)) throw InvalidArgument("minimum contrast must be nonnegative");
  std::vector<char> keep(ds.records.size(), 0);
  parallel_for(ds.records.size(), [&](std::size_t i) {
    const Spectrum spec = diagonalize(device.params, {ds.records[i].phi_ext},
                                      std::max(options.t1.chi_levels, options.t1.n_levels),
                                      options.t1.diagonalize);
    try {
      const double c0 = dispersive_shift(spec, device.res, 0, options.t1.guard_band);
      const double c1 = dispersive_shift(spec, device.res, 1, options.t1.guard_band);
      keep[i] = std::abs(c1 - c0) >= options.min_contrast * device.res.kappa;
    } catch (const ResonanceCollision&) {
      keep[i] = 0;
    }
  });
  ReadoutScreenResult out;
  out.kept.qubit_id = ds.qubit_id;
  out.dropped.qubit_id = ds.qubit_id;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    (keep[i] ? out.kept : out.dropped).records.push_back(ds.records[i]);
  }
  return out;
}

double extract_qceff(const T1Model& model, double t1, const ExtractionOptions& options) {
  if (!(t1 > 0.0) || !std::isfinite(t1)) throw InvalidArgument("measured T1 must be positive");
  if (!model.has_capacitive()) throw InvalidArgument("extraction needs the capacitive mechanism");
  if (!(options.initial_qc > 0.0) || !(options.initial_spread > 0.0)) {
    throw InvalidArgument("initial simplex must be positive");
  }
  const auto cost = [&](const std::vector<double>& x) {
    const double d = model.t1(std::pow(10.0, x[0]), options.mode) - t1;
    return d * d;
  };
  const double x0 = std::log10(options.initial_qc);
  NelderMeadOptions nm;
  nm.max_iterations = options.max_iterations;
  nm.x_tolerance = std::log10(1.0 + options.rel_tolerance);
  const NelderMeadResult res =
      nelder_mead(cost, {{x0}, {x0 + std::log10(1.0 + options.initial_spread)}}, nm);
  if (!res.converged) {
    std::ostringstream msg;
    msg << "qc_eff inversion did not converge in " << options.max_iterations << " iterations";
    throw ConvergenceError(msg.str(), res.spread);
  }
  return std::pow(10.0, res.x[0]);
}

double extract_qceff(const T1Record& record, const DeviceModel& device,
                     const ExtractionOptions& options) {
  const T1Model model(device.params, device.res, device.env, {record.phi_ext}, options.mechanisms,
                      options.t1);
  return extract_qceff(model, record.t1, options);
}

double extract_qceff_closed_form(const T1Model& model, double t1) {
  if (!(t1 > 0.0)) throw InvalidArgument("measured T1 must be positive");
  const double excess = 1.0 / t1 - model.other_pair_rate();
  if (!(excess > 0.0)) {
    throw NumericalError("measured decay is slower than the non-capacitive mechanisms allow");
  }
  return model.capacitive_unit_pair_rate() / excess;
}

std::vector<double> QceffDistribution::values() const {
  std::vector<double> v;
  v.reserve(entries.size());
  for (const auto& e : entries) v.push_back(e.qceff);
  return v;
}

QceffDistribution extract_distribution(const T1Dataset& ds, const DeviceModel& device,
                                       const ExtractionOptions& options) {
  QceffDistribution out;
  out.qubit_id = ds.qubit_id;
  out.epsilon_used = device.env.epsilon;
  out.entries.resize(ds.records.size());
  parallel_for(ds.records.size(), [&](std::size_t i) {
    const T1Record& r = ds.records[i];
    const T1Model model(device.params, device.res, device.env, {r.phi_ext}, options.mechanisms,
                        options.t1);
    QceffEntry& e = out.entries[i];
    e.freq = r.omega01 ? *r.omega01 : model.omega01();
    e.qceff = extract_qceff(model, r.t1, options);
    e.n_binned = r.n_binned;
    e.phi_ext = r.phi_ext;
  });
  return out;
}

EpsilonFit fit_epsilon_global(std::span<const QubitInputs> qubits, const ExtractionOptions& options,
                              const EpsilonGrid& grid) {
  if (qubits.empty()) throw InvalidArgument("epsilon fit needs at least one qubit");
  if (!(grid.step > 0.0) || !(grid.hi >= grid.lo)) throw InvalidArgument("invalid epsilon grid");
  EpsilonFit fit;
  const auto steps = static_cast<int>(std::llround((grid.hi - grid.lo) / grid.step));
  for (int k = 0; k <= steps; ++k) fit.grid.push_back(grid.lo + grid.step * k);

  struct Slot {
    std::size_t qubit;
    const T1Record* record;
    std::unique_ptr<T1Model> model;
  };
  std::vector<Slot> slots;
  for (std::size_t q = 0; q < qubits.size(); ++q) {
    for (const auto& r : qubits[q].data.records) slots.push_back({q, &r, nullptr});
  }
  if (slots.empty()) throw DataError("epsilon fit has no records");
  // Models are built once; only the capacitive exponent changes across the grid.
  parallel_for(slots.size(), [&](std::size_t i) {
    const DeviceModel& d = qubits[slots[i].qubit].device;
    slots[i].model = std::make_unique<T1Model>(d.params, d.res, d.env, FluxBias{slots[i].record->phi_ext},
                                               options.mechanisms, options.t1);
  });

  std::vector<double> q(slots.size());
  for (double eps : fit.grid) {
    parallel_for(slots.size(), [&](std::size_t i) {
      slots[i].model->set_epsilon(eps);
      q[i] = extract_qceff(*slots[i].model, slots[i].record->t1, options);
    });
    std::vector<double> sum(qubits.size(), 0.0);
    std::vector<std::size_t> count(qubits.size(), 0);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      sum[slots[i].qubit] += q[i];
      ++count[slots[i].qubit];
    }
    std::vector<double> dev(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const double mean = sum[slots[i].qubit] / static_cast<double>(count[slots[i].qubit]);
      dev[i] = std::log10(q[i]) - std::log10(mean);
    }
    const double m = std::accumulate(dev.begin(), dev.end(), 0.0) / static_cast<double>(dev.size());
    double var = 0.0;
    for (double d : dev) var += (d - m) * (d - m);
    fit.variance.push_back(dev.size() > 1 ? var / static_cast<double>(dev.size() - 1) : 0.0);
  }
  const auto best = std::min_element(fit.variance.begin(), fit.variance.end()) - fit.variance.begin();
  fit.epsilon = fit.grid[static_cast<std::size_t>(best)];
  return fit;
}

FluxNoiseFit extract_flux_noise_amplitude(const DephasingDataset& ds, const FluxoniumParams& params) {
  FluxNoiseFit out;
  std::vector<const DephasingRecord*> used;
  for (const auto& r : ds.records) {
    if (std::abs(fold_flux(r.phi_ext) - 0.5) < 1e-6) {
      ++out.n_sweet_spot;
    } else {
      used.push_back(&r);
    }
  }
  if (used.empty()) throw DataError("all dephasing records sit at the sweet spot");
  if (used.size() < 2) throw DataError("flux-noise fit needs at least two records off the sweet spot");
  std::vector<double> slope(used.size());
  parallel_for(used.size(), [&](std::size_t i) {
    slope[i] = used[i]->slope ? std::abs(*used[i]->slope)
                              : std::abs(flux_dispersion(params, {used[i]->phi_ext}));
  });
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < used.size(); ++i) {
    sxy += slope[i] * used[i]->gamma_phi_e;
    sxx += slope[i] * slope[i];
  }
  if (!(sxx > 0.0)) throw NumericalError("flux dispersion vanishes at every record");
  out.sqrt_a_phi = sxy / sxx / std::sqrt(std::log(2.0));
  out.n_used = used.size();
  return out;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

DistributionSummary summarize(std::span<const double> values, bool allow_singleton) {
  if (values.empty()) throw InvalidArgument("cannot summarize an empty distribution");
  if (values.size() == 1 && !allow_singleton) {
    throw InvalidArgument("standard deviation is undefined for a single value");
  }
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  DistributionSummary s;
  s.n = v.size();
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(s.n);
  s.median = quantile_sorted(v, 0.5);
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
  s.iqr = quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
  return s;
}

double jj_participation(double junction_area, double c_sigma, double specific_capacitance) {
  if (!(junction_area > 0.0) || !(c_sigma > 0.0) || !(specific_capacitance > 0.0)) {
    throw InvalidArgument("junction area and capacitances must be positive");
  }
  const double p = junction_area * specific_capacitance / c_sigma;
  if (!(p > 0.0 && p <= 1.0)) {
    std::ostringstream msg;
    msg << "junction participation " << p << " outside (0, 1]";
    throw InvalidArgument(msg.str());
  }
  return p;
}

double map_qjj(double qceff, double p_jj, double q_other) {
  if (!(p_jj > 0.0 && p_jj <= 1.0)) throw InvalidArgument("participation must lie in (0, 1]");
  if (!(qceff > 0.0) || !(q_other > 0.0)) throw InvalidArgument("quality factors must be positive");
  // 1/qceff = p / q_jj + (1 - p) / q_other
  const double rest = std::isinf(q_other) ? 0.0 : (1.0 - p_jj) / q_other;
  const double inv = 1.0 / qceff - rest;
  if (!(inv > 0.0)) throw NumericalError("other losses already exceed the measured loss");
  return p_jj / inv;
}

}  // namespace fluxrelax
