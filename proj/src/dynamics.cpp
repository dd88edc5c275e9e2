#include "fluxrelax/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "fluxrelax/constants.hpp"
#include "fluxrelax/errors.hpp"

namespace fluxrelax {

using constants::kBoltzmann;
using constants::kPlanck;

RateMatrix::RateMatrix(Eigen::MatrixXd b) : b_(std::move(b)) {
  if (b_.rows() != b_.cols() || b_.rows() < 2) {
    throw InvalidArgument("rate matrix must be square with at least two levels");
  }
  if (!b_.allFinite()) throw NumericalError("rate matrix has non-finite entries");
  max_rate_ = b_.cwiseAbs().maxCoeff();
  if (max_rate_ == 0.0) throw NumericalError("rate matrix is identically zero");

  Eigen::EigenSolver<Eigen::MatrixXd> solver(b_);
  if (solver.info() != Eigen::Success) throw NumericalError("rate matrix eigendecomposition failed");
  values_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
  const auto n = b_.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    // Fix the arbitrary phase so real modes come out real.
    Eigen::Index big = 0;
    vectors_.col(k).cwiseAbs().maxCoeff(&big);
    const std::complex<double> z = vectors_(big, k);
    vectors_.col(k) *= std::conj(z) / std::abs(z);
    vectors_.col(k).normalize();
  }
  lu_.compute(vectors_);

  Eigen::Index zero = 0;
  values_.cwiseAbs().minCoeff(&zero);
  stationary_ = static_cast<std::size_t>(zero);
  const double scale = values_.cwiseAbs().maxCoeff();
  int near_zero = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(values_(k)) <= 1e-9 * scale) ++near_zero;
  }
  if (near_zero != 1) {
    std::ostringstream msg;
    msg << "rate matrix has " << near_zero << " stationary modes; the level graph is disconnected";
    throw NumericalError(msg.str());
  }
}

Eigen::VectorXd RateMatrix::stationary() const {
  Eigen::VectorXd v = vectors_.col(static_cast<Eigen::Index>(stationary_)).real();
  return v / v.sum();
}

Eigen::VectorXcd RateMatrix::coefficients(const Eigen::VectorXd& p) const {
  if (p.size() != b_.rows()) throw InvalidArgument("population vector has the wrong length");
  return lu_.solve(p.cast<std::complex<double>>());
}

RateMatrix build_rate_matrix(std::span<const MechanismRateTable> tables) {
  if (tables.empty()) throw InvalidArgument("no rate tables supplied");
  const auto n = tables.front().rates.rows();
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : tables) {
    if (t.rates.rows() != n || t.rates.cols() != n) {
      throw InvalidArgument("rate tables have mismatched dimensions");
    }
    rates += t.rates;
  }
  rates.diagonal().setZero();
  Eigen::MatrixXd b = rates.transpose();
  b.diagonal() = -rates.rowwise().sum();
  return RateMatrix(std::move(b));
}

Eigen::VectorXd thermal_population(const Spectrum& spec, double temperature) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  const Eigen::VectorXd& e = spec.energies();
  const double beta = kPlanck / (kBoltzmann * temperature);
  Eigen::VectorXd p = (-(e.array() - e.minCoeff()) * beta).exp().matrix();
  return p / p.sum();
}

Eigen::VectorXd invert_computational(Eigen::VectorXd p) {
  if (p.size() < 2) throw InvalidArgument("population vector needs at least two levels");
  std::swap(p(0), p(1));
  return p;
}

PopulationTrace evolve(const RateMatrix& rm, const Eigen::VectorXd& p0, std::span<const double> times) {
  const auto n = static_cast<Eigen::Index>(rm.n());
  if (p0.size() != n) throw InvalidArgument("initial population has the wrong length");
  if ((p0.array() < -1e-12).any() || std::abs(p0.sum() - 1.0) > 1e-9) {
    throw InvalidArgument("initial state is not a probability vector");
  }
  PopulationTrace trace;
  trace.times.assign(times.begin(), times.end());
  trace.initial = p0;
  trace.populations.resize(static_cast<Eigen::Index>(times.size()), n);
  const Eigen::VectorXcd c = rm.coefficients(p0);
  for (std::size_t r = 0; r < times.size(); ++r) {
    const double t = times[r];
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("times must be finite and nonnegative");
    const auto row = static_cast<Eigen::Index>(r);
    if (t == 0.0) {
      trace.populations.row(row) = p0.transpose();
      continue;
    }
    const Eigen::VectorXcd weights = (rm.eigenvalues().array() * t).exp() * c.array();
    Eigen::VectorXd p = (rm.eigenvectors() * weights).real();
    const double sum = p.sum();
    if (std::abs(sum - 1.0) > 1e-9) {
      p /= sum;
      trace.renormalized = true;
    }
    trace.populations.row(row) = p.transpose();
  }
  return trace;
}

namespace {

struct LinearPart {
  double amplitude;
  double offset;
  double ss;
};

// Best A, C for a fixed decay time.
LinearPart solve_linear(std::span<const double> t, std::span<const double> y, double tau) {
  double see = 0.0, se = 0.0, sy = 0.0, sey = 0.0;
  const double n = static_cast<double>(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double e = std::exp(-t[k] / tau);
    see += e * e;
    se += e;
    sy += y[k];
    sey += e * y[k];
  }
  const double det = see * n - se * se;
  LinearPart out{0.0, sy / n, 0.0};
  if (det > 1e-14 * see * n) {
    out.amplitude = (sey * n - se * sy) / det;
    out.offset = (see * sy - se * sey) / det;
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double r = out.amplitude * std::exp(-t[k] / tau) + out.offset - y[k];
    out.ss += r * r;
  }
  return out;
}

double sum_squares(std::span<const double> t, std::span<const double> y, double a, double tau,
                   double c) {
  double ss = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double r = a * std::exp(-t[k] / tau) + c - y[k];
    ss += r * r;
  }
  return ss;
}

// Log-linear estimate of the decay time after removing the tail value.
double log_linear_guess(std::span<const double> t, std::span<const double> y) {
  const double tail = y.back();
  const double head = std::abs(y.front() - tail);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double d = std::abs(y[k] - tail);
    if (d <= 0.05 * head || d == 0.0) continue;
    const double l = std::log(d);
    sx += t[k];
    sy += l;
    sxx += t[k] * t[k];
    sxy += t[k] * l;
    ++m;
  }
  if (m < 2) return 0.0;
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return slope < 0.0 ? -1.0 / slope : 0.0;
}

}  // namespace

DecayFit fit_exponential(std::span<const double> times, std::span<const double> signal) {
  if (times.size() != signal.size()) throw InvalidArgument("times and signal differ in length");
  if (times.size() < 4) throw InvalidArgument("exponential fit needs at least four samples");
  double t_lo = std::numeric_limits<double>::infinity();
  double t_hi = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || !std::isfinite(signal[k])) {
      throw InvalidArgument("fit input contains non-finite values");
    }
    if (times[k] > 0.0) t_lo = std::min(t_lo, times[k]);
    t_hi = std::max(t_hi, times[k]);
  }
  const auto [y_min, y_max] = std::minmax_element(signal.begin(), signal.end());
  const double y_scale = std::max(std::abs(*y_min), std::abs(*y_max));
  if (*y_max - *y_min <= 1e-14 * y_scale || *y_max == *y_min) {
    throw NumericalError("cannot fit an exponential to a constant signal");
  }
  if (!(t_hi > 0.0)) throw InvalidArgument("fit needs positive delay times");

  // Variable projection: scan log(tau), then refine the bracketing cell.
  const double u_lo = std::log(t_lo / 20.0);
  const double u_hi = std::log(t_hi * 20.0);
  constexpr int kGrid = 64;
  std::vector<double> us(kGrid + 1), ss(kGrid + 1);
  for (int k = 0; k <= kGrid; ++k) {
    us[k] = u_lo + (u_hi - u_lo) * k / kGrid;
    ss[k] = solve_linear(times, signal, std::exp(us[k])).ss;
  }
  int best = static_cast<int>(std::min_element(ss.begin(), ss.end()) - ss.begin());
  if (const double guess = log_linear_guess(times, signal); guess > 0.0) {
    const double ug = std::log(guess);
    if (ug > u_lo && ug < u_hi && solve_linear(times, signal, guess).ss < ss[best]) {
      best = static_cast<int>(std::lround((ug - u_lo) / (u_hi - u_lo) * kGrid));
    }
  }
  if (best == 0 || best == kGrid) {
    throw ConvergenceError("decay time lies outside the sampled window", std::exp(us[best]));
  }
  const auto refined = boost::math::tools::brent_find_minima(
      [&](double u) { return solve_linear(times, signal, std::exp(u)).ss; }, us[best - 1],
      us[best + 1], std::numeric_limits<double>::digits);
  double tau = std::exp(refined.first);
  LinearPart lin = solve_linear(times, signal, tau);
  double a = lin.amplitude;
  double c = lin.offset;
  double cost = lin.ss;

  // Levenberg-Marquardt polish on (A, tau, C).
  double lambda = 1e-6;
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double e = std::exp(-times[k] / tau);
      const double r = a * e + c - signal[k];
      const Eigen::Vector3d g(e, a * e * times[k] / (tau * tau), 1.0);
      jtj += g * g.transpose();
      jtr += g * r;
    }
    bool improved = false;
    for (int tries = 0; tries < 20 && !improved; ++tries) {
      Eigen::Matrix3d m = jtj;
      m.diagonal() *= 1.0 + lambda;
      const Eigen::Vector3d step = m.ldlt().solve(-jtr);
      const double tau_new = tau + step(1);
      if (!(tau_new > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const double cost_new = sum_squares(times, signal, a + step(0), tau_new, c + step(2));
      if (cost_new <= cost) {
        const bool tiny = std::abs(step(1)) <= 1e-15 * tau;
        a += step(0);
        tau = tau_new;
        c += step(2);
        cost = cost_new;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (tiny) iter = 100;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  if (!std::isfinite(tau) || !(tau > 0.0)) throw ConvergenceError("exponential fit diverged", tau);
  return {tau, a, c, std::sqrt(cost / static_cast<double>(times.size()))};
}

namespace {

// Index of the conjugate partner of mode k, or -1 for a real mode.
Eigen::Index conjugate_partner(const RateMatrix& rm, Eigen::Index k) {
  const auto& g = rm.eigenvalues();
  if (std::abs(g(k).imag()) <= 1e-12 * std::abs(g(k))) return -1;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    if (j != k && std::abs(g(j) - std::conj(g(k))) <= 1e-9 * std::abs(g(k))) return j;
  }
  return -1;
}

std::size_t dominant_mode(const RateMatrix& rm, const Eigen::VectorXcd& c, bool strict) {
  const auto n = static_cast<Eigen::Index>(rm.n());
  const auto zero = static_cast<Eigen::Index>(rm.stationary_index());
  Eigen::Index best = -1;
  double best_w = -1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == zero) continue;
    const double w = std::norm(c(k));
    if (w > best_w) {
      best_w = w;
      best = k;
    }
  }
  if (strict) {
    // A complex-conjugate pair is one real oscillatory mode, not a tie.
    const Eigen::Index partner = conjugate_partner(rm, best);
    std::vector<Eigen::Index> tied;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == zero || k == best || k == partner) continue;
      if (std::abs(std::norm(c(k)) - best_w) <= 1e-12 * best_w) tied.push_back(k);
    }
    if (!tied.empty()) {
      std::ostringstream msg;
      msg << "dominant decay mode is ambiguous: modes " << best;
      for (auto k : tied) msg << ", " << k;
      msg << " overlap equally with the initial state";
      throw NumericalError(msg.str());
    }
  }
  return static_cast<std::size_t>(best);
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, j);
  return out;
}

}  // namespace

std::vector<double> decay_time_grid(const RateMatrix& rm, const Eigen::VectorXd& p0,
                                    const TimeGridOptions& options) {
  if (options.points < 4) throw InvalidArgument("time grid needs at least four points");
  const Eigen::VectorXcd c = rm.coefficients(p0);
  const auto k = static_cast<Eigen::Index>(dominant_mode(rm, c, false));
  const double rate = std::abs(rm.eigenvalues()(k).real());
  if (!(rate > 0.0)) throw NumericalError("dominant decay mode has zero rate");
  const double t1 = 1.0 / rate;
  const double a = std::log(options.start_factor * t1);
  const double b = std::log(options.stop_factor * t1);
  std::vector<double> t(options.points);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(t.size() - 1));
  }
  return t;
}

namespace {

std::vector<double> readout_levels(const Spectrum& spec, const ResonatorParams& res,
                                   std::size_t n, double guard_band, DressedResponse* response) {
  DressedResponse r = dressed_response(spec, res, guard_band);
  if (r.s21_points.size() < n) {
    throw InvalidArgument("spectrum holds fewer levels than the rate matrix");
  }
  std::vector<double> re(n);
  for (std::size_t i = 0; i < n; ++i) re[i] = r.s21_points[i].real();
  if (response) *response = std::move(r);
  return re;
}

std::vector<double> signal_of(const PopulationTrace& trace, const std::vector<double>& re) {
  std::vector<double> s(trace.times.size());
  for (std::size_t r = 0; r < s.size(); ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < re.size(); ++i) {
      acc += trace.populations(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) * re[i];
    }
    s[r] = std::abs(acc);
  }
  return s;
}

}  // namespace

SignalTrace simulate_t1_signal(const RateMatrix& rm, const Spectrum& spec, const ResonatorParams& res,
                               const Environment& env, std::span<const double> times,
                               double guard_band) {
  if (times.empty()) throw InvalidArgument("no delay times supplied");
  if (spec.n_levels() < rm.n()) throw InvalidArgument("spectrum holds fewer levels than the rate matrix");
  SignalTrace out;
  const std::vector<double> re = readout_levels(spec, res, rm.n(), guard_band, &out.response);
  const Eigen::VectorXd p0 = invert_computational(thermal_population(spec.truncated(rm.n()), env.t_qubit));
  out.populations = evolve(rm, p0, times);
  out.signal = signal_of(out.populations, re);
  return out;
}

ExponentialnessReport exponentialness(const RateMatrix& rm, const Eigen::VectorXd& p0) {
  const Eigen::VectorXcd c = rm.coefficients(p0);
  const std::size_t k = dominant_mode(rm, c, true);
  const auto zero = static_cast<Eigen::Index>(rm.stationary_index());
  const Eigen::Index partner = conjugate_partner(rm, static_cast<Eigen::Index>(k));
  // p0 = sum_i c_i v_i, so the remainder is the sum over the other modes.
  Eigen::VectorXcd rest = Eigen::VectorXcd::Zero(p0.size());
  for (Eigen::Index i = 0; i < p0.size(); ++i) {
    if (i == zero || i == static_cast<Eigen::Index>(k) || i == partner) continue;
    rest += c(i) * rm.eigenvectors().col(i);
  }
  ExponentialnessReport out;
  out.delta = rest.real();
  out.m = out.delta.norm();
  out.dominant_index = k;
  out.dominant_rate = -rm.eigenvalues()(static_cast<Eigen::Index>(k)).real();
  return out;
}

MisassignmentError heralded_misassignment_error(const RateMatrix& rm, const Spectrum& spec,
                                                const Environment& env, std::span<const double> times) {
  const Eigen::VectorXd p0 = invert_computational(thermal_population(spec.truncated(rm.n()), env.t_qubit));
  const PopulationTrace trace = evolve(rm, p0, times);
  const std::vector<double> p1 = column(trace.populations, 1);
  std::vector<double> leaked = p1;
  for (std::size_t r = 0; r < leaked.size(); ++r) {
    for (Eigen::Index i = 2; i < trace.populations.cols(); ++i) {
      leaked[r] += trace.populations(static_cast<Eigen::Index>(r), i);
    }
  }
  MisassignmentError out;
  out.t1 = fit_exponential(trace.times, p1).t1;
  out.t1_to_excited = fit_exponential(trace.times, leaked).t1;
  out.to_ground = 0.0;
  out.to_excited = (out.t1 - out.t1_to_excited) / out.t1;
  return out;
}

SignalError dispersive_signal_error(const RateMatrix& rm, const Spectrum& spec,
                                    const ResonatorParams& res, const Environment& env,
                                    std::span<const double> times) {
  const SignalTrace st = simulate_t1_signal(rm, spec, res, env, times);
  SignalError out;
  out.t1_population = fit_exponential(st.populations.times, column(st.populations.populations, 1)).t1;
  out.t1_signal = fit_exponential(st.populations.times, st.signal).t1;
  out.relative = (out.t1_population - out.t1_signal) / out.t1_population;
  return out;
}

T1Model::T1Model(const FluxoniumParams& params, const ResonatorParams& res, const Environment& env,
                 FluxBias bias, std::span<const Mechanism> mechanisms, const T1Options& options)
    : params_(params), res_(res), env_(env), options_(options) {
  env_.validate();
  res_.validate();
  if (mechanisms.empty()) throw InvalidArgument("no loss mechanisms selected");
  if (options_.n_levels < 2) throw InvalidArgument("at least two levels are required");
  const std::size_t big = std::max(options_.n_levels, options_.chi_levels);
  chi_spec_ = diagonalize(params_, bias, big, options_.diagonalize);
  spec_ = chi_spec_.truncated(options_.n_levels);

  const auto n = static_cast<Eigen::Index>(options_.n_levels);
  capacitive_flat_ = Eigen::MatrixXd::Zero(n, n);
  capacitive_unit_ = capacitive_flat_;
  other_ = Eigen::MatrixXd::Zero(n, n);
  std::vector<Mechanism> seen;
  for (Mechanism m : mechanisms) {
    if (std::find(seen.begin(), seen.end(), m) != seen.end()) continue;
    seen.push_back(m);
    if (m == Mechanism::capacitive) {
      Environment unit = env_;
      unit.qc_eff = 1.0;
      unit.epsilon = 0.0;
      capacitive_flat_ = build_mechanism_table(spec_, params_, res_, unit, m).rates;
      has_capacitive_ = true;
    } else {
      other_ += build_mechanism_table(spec_, params_, res_, env_, m).rates;
    }
  }
  set_epsilon(env_.epsilon);
  try {
    readout_ = readout_levels(chi_spec_, res_, options_.n_levels, options_.guard_band, nullptr);
    readout_ready_ = true;
  } catch (const ResonanceCollision&) {
    readout_error_ = std::current_exception();
  }
}

void T1Model::set_epsilon(double epsilon) {
  if (!std::isfinite(epsilon)) throw InvalidArgument("epsilon must be finite");
  env_.epsilon = epsilon;
  if (!has_capacitive_) return;
  // Q'(f) = qc (f0 / f)^eps, so rates scale as (f / f0)^eps relative to eps = 0.
  capacitive_unit_ = capacitive_flat_;
  for (Eigen::Index i = 0; i < capacitive_unit_.rows(); ++i) {
    for (Eigen::Index j = 0; j < capacitive_unit_.cols(); ++j) {
      if (i == j || capacitive_unit_(i, j) == 0.0) continue;
      const double f = std::abs(spec_.energies()(j) - spec_.energies()(i));
      capacitive_unit_(i, j) *= std::pow(f / constants::kQcReferenceHz, epsilon);
    }
  }
}

Eigen::MatrixXd T1Model::total_rates(double qc_eff) const {
  if (!(qc_eff > 0.0) || !std::isfinite(qc_eff)) throw InvalidArgument("qc_eff must be positive");
  Eigen::MatrixXd r = other_;
  if (has_capacitive_) r += capacitive_unit_ / qc_eff;
  return r;
}

RateMatrix T1Model::rate_matrix(double qc_eff) const {
  const Eigen::MatrixXd r = total_rates(qc_eff);
  Eigen::MatrixXd b = r.transpose();
  b.diagonal() = -r.rowwise().sum();
  return RateMatrix(std::move(b));
}

double T1Model::capacitive_unit_pair_rate() const {
  return has_capacitive_ ? capacitive_unit_(0, 1) + capacitive_unit_(1, 0) : 0.0;
}

double T1Model::other_pair_rate() const { return other_(0, 1) + other_(1, 0); }

double T1Model::t1(double qc_eff, T1Mode mode) const {
  if (mode == T1Mode::two_level) {
    const Eigen::MatrixXd r = total_rates(qc_eff);
    const double total = r(0, 1) + r(1, 0);
    if (!(total > 0.0)) throw NumericalError("total 0<->1 rate is zero");
    return 1.0 / total;
  }
  const RateMatrix rm = rate_matrix(qc_eff);
  const Eigen::VectorXd p0 = invert_computational(thermal_population(spec_, env_.t_qubit));
  const std::vector<double> times = decay_time_grid(rm, p0, options_.grid);
  const PopulationTrace trace = evolve(rm, p0, times);
  if (mode == T1Mode::multilevel_population) {
    return fit_exponential(times, column(trace.populations, 1)).t1;
  }
  if (!readout_ready_) std::rethrow_exception(readout_error_);
  return fit_exponential(times, signal_of(trace, readout_)).t1;
}

double predicted_t1(const FluxoniumParams& params, const ResonatorParams& res, const Environment& env,
                    FluxBias bias, T1Mode mode, std::span<const Mechanism> mechanisms,
                    const T1Options& options) {
  return T1Model(params, res, env, bias, mechanisms, options).t1(mode);
}

}  // namespace fluxrelax
