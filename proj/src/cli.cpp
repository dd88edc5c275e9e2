#include "fluxrelax/cli.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fluxrelax/analysis.hpp"
#include "fluxrelax/diagnostics.hpp"
#include "fluxrelax/dynamics.hpp"
#include "fluxrelax/errors.hpp"
#include "fluxrelax/io.hpp"
#include "fluxrelax/parallel.hpp"
#include "fluxrelax/statistics.hpp"

namespace fluxrelax::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json envelope(std::string_view kind) {
  json j = json::object();
  j["schema"] = io::kSchemaId;
  j["kind"] = kind;
  return j;
}

// Restores the previous warning sink when the run ends.
class WarningScope {
 public:
  explicit WarningScope(std::ostream& err) {
    previous_ = set_warning_handler([this, &err](const std::string& msg) {
      std::lock_guard lock(mutex_);
      err << "warning: " << msg << "\n";
    });
  }
  ~WarningScope() { set_warning_handler(std::move(previous_)); }
  WarningScope(const WarningScope&) = delete;
  WarningScope& operator=(const WarningScope&) = delete;

 private:
  WarningHandler previous_;
  std::mutex mutex_;
};

struct Sink {
  std::string path;
  std::ostream* out = nullptr;

  void write(const std::string& contents) const {
    if (path.empty()) {
      *out << contents;
    } else {
      io::write_file_atomic(path, contents);
    }
  }
};

T1Mode parse_mode(const std::string& s) {
  if (s == "two_level") return T1Mode::two_level;
  if (s == "multilevel_population") return T1Mode::multilevel_population;
  if (s == "multilevel_signal") return T1Mode::multilevel_signal;
  throw UsageError("unknown mode \"" + s + "\" (two_level, multilevel_population, multilevel_signal)");
}

std::string mode_name(T1Mode m) {
  switch (m) {
    case T1Mode::two_level: return "two_level";
    case T1Mode::multilevel_population: return "multilevel_population";
    case T1Mode::multilevel_signal: return "multilevel_signal";
  }
  return "";
}

std::vector<Mechanism> parse_mechanisms(const std::vector<std::string>& names) {
  if (names.empty()) return kDefaultMechanisms;
  std::vector<Mechanism> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.assign(std::begin(kAllMechanisms), std::end(kAllMechanisms));
      continue;
    }
    const auto m = parse_mechanism(n);
    if (!m) throw UsageError("unknown mechanism \"" + n + "\"");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  return out;
}

// Flags shared by every subcommand that evaluates the loss model.
struct ModelFlags {
  int levels = 6;
  double epsilon = 0.25;
  double qubit_temp = 0.040;
  double res_temp = 0.065;
  double qc_eff = 3e5;
  double x_qp = 0.0;
  std::vector<std::string> mechanisms;
  CLI::Option* epsilon_opt = nullptr;
  CLI::Option* qubit_temp_opt = nullptr;
  CLI::Option* res_temp_opt = nullptr;
  CLI::Option* qc_opt = nullptr;
  CLI::Option* x_qp_opt = nullptr;

  void add(CLI::App* app, bool with_qc) {
    app->add_option("--levels", levels, "Levels in the rate equations")->capture_default_str();
    epsilon_opt = app->add_option("--epsilon", epsilon, "Frequency exponent of Q_C")->capture_default_str();
    qubit_temp_opt = app->add_option("--qubit-temp-k", qubit_temp, "Qubit bath temperature (K)")->capture_default_str();
    res_temp_opt = app->add_option("--res-temp-k", res_temp, "Resonator temperature for Purcell emission (K)")
                       ->capture_default_str();
    x_qp_opt = app->add_option("--x-qp", x_qp, "Normalized quasiparticle density");
    if (with_qc) qc_opt = app->add_option("--qc-eff", qc_eff, "Capacitive quality factor at 6 GHz");
    app->add_option("--mechanisms", mechanisms, "Loss mechanisms (comma separated, or 'all')")->delimiter(',');
  }

  void apply(DeviceModel& d) const {
    if (levels < 2) throw UsageError("--levels must be at least 2");
    if (epsilon_opt->count() > 0) d.env.epsilon = epsilon;
    if (qubit_temp_opt->count() > 0) d.env.t_qubit = qubit_temp;
    if (res_temp_opt->count() > 0) d.env.t_res = res_temp;
    if (x_qp_opt->count() > 0) d.env.x_qp = x_qp;
    if (qc_opt != nullptr && qc_opt->count() > 0) d.env.qc_eff = qc_eff;
    try {
      d.env.validate();
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }

  T1Options t1_options() const {
    T1Options o;
    o.n_levels = static_cast<std::size_t>(levels);
    o.chi_levels = std::max<std::size_t>(o.n_levels, 10);
    return o;
  }
};

struct FluxFlags {
  std::vector<double> values;
  double start = 0.0;
  double stop = 1.0;
  int points = 101;

  void add(CLI::App* app) {
    app->add_option("--flux", values, "Flux bias values phi_ext/Phi0 (comma separated)")->delimiter(',');
    app->add_option("--flux-start", start, "First grid point")->capture_default_str();
    app->add_option("--flux-stop", stop, "Last grid point")->capture_default_str();
    app->add_option("--flux-points", points, "Grid size")->capture_default_str();
  }

  std::vector<double> grid() const {
    if (!values.empty()) return values;
    if (points < 1) throw UsageError("--flux-points must be positive");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
      g[static_cast<std::size_t>(i)] = points == 1 ? start : start + (stop - start) * i / (points - 1);
    }
    return g;
  }
};

struct PipelineFlags {
  double bin_width = 8e6;
  double threshold = 0.1;
  std::string exclusion_mode = "multilevel";
  std::string mode = "multilevel_signal";
  double min_contrast = 0.5;

  void add(CLI::App* app) {
    app->add_option("--bin-width-hz", bin_width, "Frequency bin width; 0 disables binning")->capture_default_str();
    app->add_option("--exclusion-threshold", threshold, "Maximum non-capacitive share of the decay rate")
        ->capture_default_str();
    app->add_option("--exclusion-mode", exclusion_mode, "multilevel or two_level")->capture_default_str();
    app->add_option("--mode", mode, "T1 description used for the inversion")->capture_default_str();
    app->add_option("--min-contrast", min_contrast,
                    "Drop records with |chi1 - chi0| below this fraction of kappa (signal mode)")
        ->capture_default_str();
  }
};

struct PipelineOutcome {
  QceffDistribution dist;
  std::size_t n_input = 0;
  std::size_t n_ingest_dropped = 0;
  std::size_t n_after_binning = 0;
  std::size_t n_unreadable = 0;
  std::size_t n_excluded = 0;
};

ExtractionOptions extraction_options(const ModelFlags& m, const PipelineFlags& p) {
  ExtractionOptions o;
  o.mode = parse_mode(p.mode);
  o.t1 = m.t1_options();
  o.mechanisms = parse_mechanisms(m.mechanisms);
  return o;
}

// Ingest, frequency fill, binning, readout screen and exclusion.
T1Dataset prepare(const io::T1Ingest& ingest, const DeviceModel& device, const ModelFlags& m,
                  const PipelineFlags& p, PipelineOutcome& log) {
  if (p.bin_width < 0.0) throw UsageError("--bin-width-hz must be nonnegative");
  if (p.exclusion_mode != "multilevel" && p.exclusion_mode != "two_level") {
    throw UsageError("--exclusion-mode must be multilevel or two_level");
  }
  const T1Mode mode = parse_mode(p.mode);
  log.n_ingest_dropped = ingest.dropped;
  log.n_input = ingest.data.records.size() + ingest.dropped;
  T1Dataset ds = ingest.data;
  if (ds.records.empty()) throw DataError(ds.qubit_id + ": every record was dropped at ingest");
  fill_frequencies(ds, device.params);
  if (p.bin_width > 0.0) ds = bin_average(ds, p.bin_width);
  log.n_after_binning = ds.records.size();
  if (mode == T1Mode::multilevel_signal) {
    ReadoutScreenOptions ro;
    ro.min_contrast = p.min_contrast;
    ro.t1 = m.t1_options();
    auto screened = readout_screen(ds, device, ro);
    log.n_unreadable = screened.dropped.records.size();
    ds = std::move(screened.kept);
  }
  ExclusionOptions eo;
  eo.threshold = p.threshold;
  eo.mode = p.exclusion_mode == "two_level" ? ExclusionMode::two_level : ExclusionMode::multilevel;
  eo.t1 = m.t1_options();
  auto ex = exclusion_filter(ds, device, eo);
  log.n_excluded = ex.dropped.records.size();
  if (ex.kept.records.empty()) throw DataError(ds.qubit_id + ": no records survive the exclusion filter");
  return std::move(ex.kept);
}

void log_pipeline(std::ostream& err, const std::string& id, const PipelineOutcome& o, std::size_t n_kept) {
  err << "note: " << id << ": " << o.n_input << " records, " << o.n_ingest_dropped << " dropped at ingest, "
      << o.n_after_binning << " after binning, " << o.n_unreadable << " unreadable, " << o.n_excluded
      << " excluded, " << n_kept << " kept\n";
}

json summary_json(const DistributionSummary& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"std", s.std}, {"iqr", s.iqr}, {"n", s.n}};
}

json welch_json(const std::string& row, const std::string& col, std::span<const double> a,
                std::span<const double> b, double alpha) {
  WelchResult w;
  try {
    w = welch_t_test(a, b, alpha);
  } catch (const InvalidArgument& e) {
    throw DataError(row + " vs " + col + ": " + e.what());
  }
  const auto [lo, hi] = ci_percent(w, w.mean2);
  return {{"row", row},       {"col", col},         {"t0", w.t0},           {"nu", w.nu},
          {"p_value", w.p_value}, {"ci_low", w.ci_low}, {"ci_high", w.ci_high}, {"ci_low_pct", lo},
          {"ci_high_pct", hi}, {"mean_row", w.mean1}, {"mean_col", w.mean2}};
}

struct Group {
  std::string name;
  std::vector<double> values;
};

json welch_matrix(const std::vector<Group>& groups, double alpha) {
  json pairs = json::array();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = 0; j < groups.size(); ++j) {
      if (i == j) continue;
      pairs.push_back(welch_json(groups[i].name, groups[j].name, groups[i].values, groups[j].values, alpha));
    }
  }
  return pairs;
}

std::string csv_line(std::initializer_list<std::string> fields) {
  std::string s;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) s += ",";
    s += f;
    first = false;
  }
  return s + "\n";
}

using io::format_double;

// ---- subcommands ----------------------------------------------------------

void cmd_spectrum(const std::string& device_path, const ModelFlags& m, const FluxFlags& f, const Sink& sink) {
  DeviceModel d = io::parse_device_file(device_path);
  m.apply(d);
  const auto grid = f.grid();
  std::vector<FluxBias> bias;
  for (double p : grid) bias.push_back({p});
  const auto specs = spectrum_vs_flux(d.params, bias, static_cast<std::size_t>(m.levels));
  std::string out = "phi_ext,i,j,energy_i_hz,energy_j_hz,freq_ij_hz,n_ij_abs,phi_ij_abs,sin_half_ij_abs\n";
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const Spectrum& s = specs[k];
    const auto n = static_cast<Eigen::Index>(s.n_levels());
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        out += csv_line({format_double(grid[k]), std::to_string(i), std::to_string(j),
                         format_double(s.energies()(i)), format_double(s.energies()(j)),
                         format_double(s.energies()(j) - s.energies()(i)), format_double(std::abs(s.n_elem()(i, j))),
                         format_double(std::abs(s.phi_elem()(i, j))),
                         format_double(std::abs(s.sin_half_elem()(i, j)))});
      }
    }
  }
  sink.write(out);
}

struct PointResult {
  std::string rows;
  std::vector<std::string> warnings;
};

void cmd_predict(const std::string& device_path, const ModelFlags& m, const FluxFlags& f,
                 const std::string& mode_flag, bool as_dataset, const Sink& sink) {
  DeviceModel d = io::parse_device_file(device_path);
  m.apply(d);
  const auto grid = f.grid();
  const auto mechs = parse_mechanisms(m.mechanisms);
  const T1Options opts = m.t1_options();

  std::vector<T1Mode> modes;
  if (mode_flag == "all") {
    modes = {T1Mode::two_level, T1Mode::multilevel_population, T1Mode::multilevel_signal};
  } else {
    modes = {parse_mode(mode_flag)};
  }
  if (as_dataset && modes.size() != 1) modes = {T1Mode::multilevel_signal};

  std::vector<PointResult> results(grid.size());
  std::vector<std::optional<T1Record>> records(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    PointResult& r = results[k];
    const FluxBias bias{grid[k]};
    const T1Model total(d.params, d.res, d.env, bias, mechs, opts);
    const std::string phi = format_double(grid[k]);
    const std::string f01 = format_double(total.omega01());
    auto emit = [&](const T1Model& model, std::string_view mech, T1Mode mode) {
      try {
        const double t1 = model.t1(mode);
        if (!std::isfinite(t1)) return;
        if (as_dataset) {
          records[k] = T1Record{grid[k], total.omega01(), t1, std::nullopt, 1};
        } else {
          r.rows += csv_line({phi, f01, std::string(mech), mode_name(mode), format_double(t1)});
        }
      } catch (const NumericalError& e) {
        r.warnings.push_back("phi_ext=" + phi + " " + std::string(mech) + "/" + mode_name(mode) +
                             " skipped: " + e.what());
      }
    };
    for (T1Mode mode : modes) emit(total, "total", mode);
    if (as_dataset || mechs.size() < 2) return;
    for (Mechanism mech : mechs) {
      const Mechanism one[] = {mech};
      const T1Model model(d.params, d.res, d.env, bias, one, opts);
      for (T1Mode mode : modes) {
        if (mode == T1Mode::multilevel_signal) continue;
        emit(model, mechanism_name(mech), mode);
      }
    }
  });
  for (const auto& r : results) {
    for (const auto& w : r.warnings) warn(w);
  }
  if (as_dataset) {
    T1Dataset ds;
    ds.qubit_id = d.qubit_id;
    for (const auto& rec : records) {
      if (rec) ds.records.push_back(*rec);
    }
    if (ds.records.empty()) throw NumericalError("no flux point produced a finite T1");
    sink.write(io::t1_to_csv(ds));
    return;
  }
  std::string out = "phi_ext,omega01_hz,mechanism,mode,t1_s\n";
  for (const auto& r : results) out += r.rows;
  sink.write(out);
}

void cmd_simulate(const std::string& device_path, const ModelFlags& m, double phi,
                  const std::string& trace_path, const Sink& summary_sink) {
  DeviceModel d = io::parse_device_file(device_path);
  m.apply(d);
  const auto mechs = parse_mechanisms(m.mechanisms);
  const T1Options opts = m.t1_options();
  const Spectrum chi_spec = diagonalize(d.params, {phi}, opts.chi_levels);
  const Spectrum spec = chi_spec.truncated(opts.n_levels);
  std::vector<MechanismRateTable> tables;
  for (Mechanism mech : mechs) tables.push_back(build_mechanism_table(spec, d.params, d.res, d.env, mech));
  const RateMatrix rm = build_rate_matrix(tables);
  const Eigen::VectorXd p0 = invert_computational(thermal_population(spec, d.env.t_qubit));
  const auto times = decay_time_grid(rm, p0, opts.grid);

  const SignalTrace trace = simulate_t1_signal(rm, chi_spec, d.res, d.env, times, opts.guard_band);
  const SignalError serr = dispersive_signal_error(rm, chi_spec, d.res, d.env, times);
  const MisassignmentError herr = heralded_misassignment_error(rm, spec, d.env, times);
  const ExponentialnessReport ex = exponentialness(rm, p0);
  const Eigen::VectorXd p1 = trace.populations.level(1);
  const DecayFit fit = fit_exponential(times, std::vector<double>(p1.begin(), p1.end()));

  if (!trace_path.empty()) {
    std::string out = "time_s";
    for (std::size_t i = 0; i < rm.n(); ++i) out += ",p" + std::to_string(i);
    out += ",signal\n";
    for (std::size_t r = 0; r < times.size(); ++r) {
      out += format_double(times[r]);
      for (std::size_t i = 0; i < rm.n(); ++i) {
        out += "," + format_double(trace.populations.populations(static_cast<Eigen::Index>(r),
                                                                 static_cast<Eigen::Index>(i)));
      }
      out += "," + format_double(trace.signal[r]) + "\n";
    }
    io::write_file_atomic(trace_path, out);
  }

  json j = envelope("decay_summary");
  j["qubit_id"] = d.qubit_id;
  j["phi_ext"] = phi;
  j["levels"] = rm.n();
  j["omega01_hz"] = spec.transition_frequency(0, 1);
  j["chi_hz"] = trace.response.chi;
  j["rotation_angle_rad"] = trace.response.rotation_angle;
  j["t1_population_s"] = serr.t1_population;
  j["t1_signal_s"] = serr.t1_signal;
  j["signal_relative_error"] = serr.relative;
  j["heralded"] = {{"t1_s", herr.t1},
                   {"t1_to_excited_s", herr.t1_to_excited},
                   {"to_ground", herr.to_ground},
                   {"to_excited", herr.to_excited}};
  j["exponentialness"] = {{"m", ex.m}, {"dominant_rate_per_s", ex.dominant_rate}};
  j["p1_fit"] = {{"t1_s", fit.t1}, {"amplitude", fit.amplitude}, {"offset", fit.offset},
                 {"residual_rms", fit.residual_rms}};
  j["renormalized"] = trace.populations.renormalized;
  summary_sink.write(j.dump(2) + "\n");
}

void cmd_extract(const std::string& device_path, const std::string& data_path, const ModelFlags& m,
                 const PipelineFlags& p, std::ostream& err, const Sink& sink) {
  DeviceModel d = io::parse_device_file(device_path);
  m.apply(d);
  const io::T1Ingest ingest = io::parse_t1_csv_file(data_path);
  PipelineOutcome log;
  const T1Dataset ds = prepare(ingest, d, m, p, log);
  QceffDistribution dist = extract_distribution(ds, d, extraction_options(m, p));
  dist.qubit_id = d.qubit_id;
  log_pipeline(err, d.qubit_id, log, dist.entries.size());
  sink.write(io::distribution_to_json(dist));
}

std::vector<QubitInputs> load_pairs(const std::vector<std::string>& devices, const std::vector<std::string>& data,
                                    const ModelFlags& m, const PipelineFlags& p, std::ostream& err,
                                    std::vector<PipelineOutcome>* logs) {
  if (devices.empty()) throw UsageError("at least one --device/--data pair is required");
  if (devices.size() != data.size()) throw UsageError("--device and --data must be given the same number of times");
  std::vector<QubitInputs> out;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    DeviceModel d = io::parse_device_file(devices[i]);
    m.apply(d);
    const io::T1Ingest ingest = io::parse_t1_csv_file(data[i]);
    PipelineOutcome log;
    T1Dataset ds = prepare(ingest, d, m, p, log);
    ds.qubit_id = d.qubit_id;
    log_pipeline(err, d.qubit_id, log, ds.records.size());
    if (logs) logs->push_back(log);
    out.push_back({std::move(d), std::move(ds)});
  }
  return out;
}

void cmd_fit_epsilon(const std::vector<std::string>& devices, const std::vector<std::string>& data,
                     const ModelFlags& m, const PipelineFlags& p, const EpsilonGrid& grid, std::ostream& err,
                     const Sink& sink) {
  const auto qubits = load_pairs(devices, data, m, p, err, nullptr);
  const EpsilonFit fit = fit_epsilon_global(qubits, extraction_options(m, p), grid);
  json j = envelope("epsilon_fit");
  j["epsilon"] = fit.epsilon;
  j["grid"] = fit.grid;
  j["variance"] = fit.variance;
  json ids = json::array();
  std::size_t n = 0;
  for (const auto& q : qubits) {
    ids.push_back(q.device.qubit_id);
    n += q.data.records.size();
  }
  j["qubits"] = ids;
  j["n_records"] = n;
  sink.write(j.dump(2) + "\n");
}

void cmd_fit_flux_noise(const std::string& device_path, const std::string& data_path, const Sink& sink) {
  const DeviceModel d = io::parse_device_file(device_path);
  const DephasingDataset ds = io::parse_dephasing_csv_file(data_path);
  const FluxNoiseFit fit = extract_flux_noise_amplitude(ds, d.params);
  json j = envelope("flux_noise_fit");
  j["qubit_id"] = d.qubit_id;
  j["sqrt_a_phi_uphi0"] = fit.sqrt_a_phi * 1e6;
  j["n_used"] = fit.n_used;
  j["n_sweet_spot"] = fit.n_sweet_spot;
  sink.write(j.dump(2) + "\n");
}

void cmd_compare(const std::vector<std::string>& dists, const std::vector<std::string>& pools, double alpha,
                 const Sink& sink) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  std::vector<Group> groups;
  for (const auto& path : dists) {
    const auto dist = io::parse_distribution_file(path);
    groups.push_back({dist.qubit_id, dist.values()});
  }
  for (const auto& spec : pools) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw UsageError("--pool expects NAME=file1,file2,...");
    }
    Group g{spec.substr(0, eq), {}};
    std::stringstream files(spec.substr(eq + 1));
    std::string file;
    while (std::getline(files, file, ',')) {
      if (file.empty()) continue;
      const auto v = io::parse_distribution_file(file).values();
      g.values.insert(g.values.end(), v.begin(), v.end());
    }
    groups.push_back(std::move(g));
  }
  if (groups.size() < 2) throw UsageError("compare needs at least two distributions or pools");
  json j = envelope("welch_matrix");
  j["alpha"] = alpha;
  json gs = json::array();
  for (const auto& g : groups) {
    DistributionSummary s;
    try {
      s = summarize(g.values);
    } catch (const InvalidArgument& e) {
      throw DataError(g.name + ": " + e.what());
    }
    gs.push_back({{"name", g.name}, {"summary", summary_json(s)}});
  }
  j["groups"] = gs;
  j["pairs"] = welch_matrix(groups, alpha);
  sink.write(j.dump(2) + "\n");
}

void cmd_report(const std::vector<std::string>& devices, const std::vector<std::string>& data, const ModelFlags& m,
                const PipelineFlags& p, double alpha, std::ostream& err, const Sink& sink) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  std::vector<PipelineOutcome> logs;
  const auto qubits = load_pairs(devices, data, m, p, err, &logs);
  const ExtractionOptions eo = extraction_options(m, p);

  json config = {{"epsilon", qubits.front().device.env.epsilon},
                 {"bin_width_hz", p.bin_width},
                 {"exclusion_threshold", p.threshold},
                 {"exclusion_mode", p.exclusion_mode},
                 {"min_contrast", p.min_contrast},
                 {"mode", p.mode},
                 {"levels", m.levels},
                 {"qubit_temp_k", qubits.front().device.env.t_qubit},
                 {"res_temp_k", qubits.front().device.env.t_res},
                 {"alpha", alpha}};
  json mech = json::array();
  for (Mechanism x : eo.mechanisms) mech.push_back(mechanism_name(x));
  config["mechanisms"] = mech;

  std::vector<Group> groups;
  std::map<std::string, Group> processes;
  json rows = json::array();
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    const auto& q = qubits[i];
    const QceffDistribution dist = extract_distribution(q.data, q.device, eo);
    const auto v = dist.values();
    const DistributionSummary s = summarize(v, true);
    rows.push_back({{"qubit_id", q.device.qubit_id},
                    {"process_label", q.device.process_label},
                    {"n_input", logs[i].n_input},
                    {"n_ingest_dropped", logs[i].n_ingest_dropped},
                    {"n_unreadable", logs[i].n_unreadable},
                    {"n_excluded", logs[i].n_excluded},
                    {"summary", summary_json(s)}});
    groups.push_back({q.device.qubit_id, v});
    if (!q.device.process_label.empty()) {
      Group& g = processes[q.device.process_label];
      g.name = q.device.process_label;
      g.values.insert(g.values.end(), v.begin(), v.end());
    }
  }
  json j = envelope("report");
  j["config"] = config;
  j["qubits"] = rows;
  std::vector<Group> eligible;
  for (const auto& g : groups) {
    if (g.values.size() >= 2) eligible.push_back(g);
  }
  j["welch"] = eligible.size() >= 2 ? welch_matrix(eligible, alpha) : json::array();
  if (processes.size() >= 2) {
    std::vector<Group> pg;
    json ps = json::array();
    for (auto& [name, g] : processes) {
      ps.push_back({{"process_label", name}, {"summary", summary_json(summarize(g.values, true))}});
      pg.push_back(g);
    }
    j["processes"] = ps;
    j["process_welch"] = welch_matrix(pg, alpha);
  }

  std::string material = config.dump();
  json inputs = json::array();
  for (std::size_t i = 0; i < devices.size(); ++i) {
    for (const auto& path : {devices[i], data[i]}) {
      const std::string bytes = io::read_file(path);
      inputs.push_back({{"path", path}, {"fnv1a", io::fnv1a_hex(bytes)}});
      material += '\0';
      material += bytes;
    }
  }
  j["provenance"] = {{"hash", io::fnv1a_hex(material)}, {"inputs", inputs}};
  sink.write(j.dump(2) + "\n");
}

// ---- error reporting ------------------------------------------------------

struct Classified {
  int code;
  std::string category;
  std::string message;
};

Classified classify(std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const SweepError& e) {
    if (e.cause()) {
      Classified c = classify(e.cause());
      c.message = e.what();
      return c;
    }
    return {kNumerical, "numerical", e.what()};
  } catch (const UsageError& e) {
    return {kUsage, "usage", e.what()};
  } catch (const CLI::ParseError& e) {
    return {kUsage, "usage", e.what()};
  } catch (const DataError& e) {
    return {kData, "data", e.what()};
  } catch (const InvalidArgument& e) {
    return {kData, "data", e.what()};
  } catch (const NumericalError& e) {
    return {kNumerical, "numerical", e.what()};
  } catch (const std::exception& e) {
    return {kNumerical, "numerical", e.what()};
  }
}

void report_error(std::ostream& err, const Classified& c) {
  json j = envelope("error");
  j["exit_code"] = c.code;
  j["category"] = c.category;
  j["message"] = c.message;
  err << j.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  WarningScope warnings(err);
  CLI::App app{"Fluxonium energy-relaxation modeling and quality-factor extraction", "fluxrelax"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fluxrelax 1.0.0");

  std::function<void()> action;
  std::string output;
  auto sink = [&] { return Sink{output, &out}; };

  // spectrum
  auto* sp = app.add_subcommand("spectrum", "Energies and matrix elements over a flux grid (CSV)");
  std::string sp_device;
  ModelFlags sp_model;
  FluxFlags sp_flux;
  sp->add_option("--device", sp_device, "Device JSON")->required();
  sp_model.add(sp, false);
  sp_flux.add(sp);
  sp->add_option("--output,-o", output, "Output path (default stdout)");
  sp->callback([&] { action = [&] { cmd_spectrum(sp_device, sp_model, sp_flux, sink()); }; });

  // predict-t1
  auto* pr = app.add_subcommand("predict-t1", "Model T1 per mechanism and mode over a flux grid (CSV)");
  std::string pr_device;
  std::string pr_mode = "all";
  bool pr_dataset = false;
  ModelFlags pr_model;
  FluxFlags pr_flux;
  pr->add_option("--device", pr_device, "Device JSON")->required();
  pr_model.add(pr, true);
  pr_flux.add(pr);
  pr->add_option("--mode", pr_mode, "two_level, multilevel_population, multilevel_signal or all")
      ->capture_default_str();
  pr->add_flag("--as-dataset", pr_dataset, "Write the total T1 as a T1 dataset CSV");
  pr->add_option("--output,-o", output, "Output path (default stdout)");
  pr->callback([&] { action = [&] { cmd_predict(pr_device, pr_model, pr_flux, pr_mode, pr_dataset, sink()); }; });

  // simulate-decay
  auto* sd = app.add_subcommand("simulate-decay", "Population and readout-signal decay at one flux point");
  std::string sd_device;
  std::string sd_trace;
  double sd_flux = 0.5;
  ModelFlags sd_model;
  sd->add_option("--device", sd_device, "Device JSON")->required();
  sd->add_option("--flux", sd_flux, "Flux bias phi_ext/Phi0")->required();
  sd_model.add(sd, true);
  sd->add_option("--trace", sd_trace, "CSV path for the population and signal traces");
  sd->add_option("--output,-o", output, "Summary JSON path (default stdout)");
  sd->callback([&] { action = [&] { cmd_simulate(sd_device, sd_model, sd_flux, sd_trace, sink()); }; });

  // extract-qceff
  auto* ex = app.add_subcommand("extract-qceff", "Invert a T1 dataset into a Q_C^eff distribution (JSON)");
  std::string ex_device, ex_data;
  ModelFlags ex_model;
  PipelineFlags ex_pipe;
  ex->add_option("--device", ex_device, "Device JSON")->required();
  ex->add_option("--data", ex_data, "T1 CSV")->required();
  ex_model.add(ex, false);
  ex_pipe.add(ex);
  ex->add_option("--output,-o", output, "Output path (default stdout)");
  ex->callback([&] { action = [&] { cmd_extract(ex_device, ex_data, ex_model, ex_pipe, err, sink()); }; });

  // fit-epsilon
  auto* fe = app.add_subcommand("fit-epsilon", "Global frequency exponent of Q_C across qubits (JSON)");
  std::vector<std::string> fe_devices, fe_data;
  ModelFlags fe_model;
  PipelineFlags fe_pipe;
  EpsilonGrid fe_grid;
  fe->add_option("--device", fe_devices, "Device JSON (repeat, paired with --data)")->required();
  fe->add_option("--data", fe_data, "T1 CSV (repeat)")->required();
  fe_model.add(fe, false);
  fe_pipe.add(fe);
  fe->add_option("--eps-lo", fe_grid.lo, "Grid start")->capture_default_str();
  fe->add_option("--eps-hi", fe_grid.hi, "Grid end")->capture_default_str();
  fe->add_option("--eps-step", fe_grid.step, "Grid step")->capture_default_str();
  fe->add_option("--output,-o", output, "Output path (default stdout)");
  fe->callback([&] {
    action = [&] { cmd_fit_epsilon(fe_devices, fe_data, fe_model, fe_pipe, fe_grid, err, sink()); };
  });

  // fit-flux-noise
  auto* fn = app.add_subcommand("fit-flux-noise", "Flux-noise amplitude from echo dephasing rates (JSON)");
  std::string fn_device, fn_data;
  fn->add_option("--device", fn_device, "Device JSON")->required();
  fn->add_option("--data", fn_data, "Dephasing CSV")->required();
  fn->add_option("--output,-o", output, "Output path (default stdout)");
  fn->callback([&] { action = [&] { cmd_fit_flux_noise(fn_device, fn_data, sink()); }; });

  // compare
  auto* cp = app.add_subcommand("compare", "Pairwise Welch tests between distributions (JSON)");
  std::vector<std::string> cp_dists, cp_pools;
  double cp_alpha = 0.05;
  cp->add_option("--dist", cp_dists, "Distribution JSON (repeat)");
  cp->add_option("--pool", cp_pools, "NAME=dist1.json,dist2.json (repeat)");
  cp->add_option("--alpha", cp_alpha, "Significance level")->capture_default_str();
  cp->add_option("--output,-o", output, "Output path (default stdout)");
  cp->callback([&] { action = [&] { cmd_compare(cp_dists, cp_pools, cp_alpha, sink()); }; });

  // report
  auto* rp = app.add_subcommand("report", "Full pipeline, summaries and Welch matrix (JSON)");
  std::vector<std::string> rp_devices, rp_data;
  ModelFlags rp_model;
  PipelineFlags rp_pipe;
  double rp_alpha = 0.05;
  rp->add_option("--device", rp_devices, "Device JSON (repeat, paired with --data)")->required();
  rp->add_option("--data", rp_data, "T1 CSV (repeat)")->required();
  rp_model.add(rp, false);
  rp_pipe.add(rp);
  rp->add_option("--alpha", rp_alpha, "Significance level")->capture_default_str();
  rp->add_option("--output,-o", output, "Output path (default stdout)");
  rp->callback([&] {
    action = [&] { cmd_report(rp_devices, rp_data, rp_model, rp_pipe, rp_alpha, err, sink()); };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    report_error(err, {kUsage, "usage", e.what()});
    return kUsage;
  }

  try {
    action();
  } catch (...) {
    const Classified c = classify(std::current_exception());
    report_error(err, c);
    return c.code;
  }
  return kOk;
}

}  // namespace fluxrelax::cli
