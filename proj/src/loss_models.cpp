#include "fluxrelax/loss_models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fluxrelax/diagnostics.hpp"
#include "fluxrelax/errors.hpp"

namespace fluxrelax {

namespace {

using namespace constants;

struct Transition {
  double f;       // |E_j - E_i| in Hz
  bool upward;    // E_j > E_i
};

Transition transition(const Spectrum& spec, std::size_t i, std::size_t j) {
  if (i == j) throw InvalidArgument("transition rate requested for identical levels");
  const double w = spec.transition_frequency(i, j);
  if (w == 0.0) {
    std::ostringstream msg;
    msg << "levels " << i << " and " << j << " are degenerate; rate undefined";
    throw NumericalError(msg.str());
  }
  return {std::abs(w), w > 0.0};
}

// Splits a symmetrized coth-weighted rate into its directional parts. `base` is
// the zero-temperature emission rate; the returned rate obeys detailed balance.
double thermal_split(double base, const Transition& tr, double temperature) {
  if (base == 0.0) return 0.0;
  const double x = kPlanck * tr.f / (kBoltzmann * temperature);
  const double occupancy = -std::expm1(-x);  // 1 - e^{-x}
  return tr.upward ? base * std::exp(-x) / occupancy : base / occupancy;
}

double n_sq(const Spectrum& spec, std::size_t i, std::size_t j) {
  return std::norm(spec.n_elem()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
}

double phi_sq(const Spectrum& spec, std::size_t i, std::size_t j) {
  const double v = spec.phi_elem()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return v * v;
}

double sin_half_sq(const Spectrum& spec, std::size_t i, std::size_t j) {
  const double v =
      spec.sin_half_elem()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return v * v;
}

}  // namespace

void Environment::validate() const {
  if (!(t_qubit > 0.0) || !(t_res > 0.0)) throw InvalidArgument("temperatures must be positive");
  if (!(qc_eff > 0.0) || !std::isfinite(qc_eff)) throw InvalidArgument("qc_eff must be positive");
  if (n_array < 1) throw InvalidArgument("array junction count must be at least 1");
  if (!(a_phi >= 0.0) || !(x_qp >= 0.0) || !(c_drive >= 0.0) || !(m_drive >= 0.0)) {
    throw InvalidArgument("noise amplitudes and couplings must be nonnegative");
  }
  if (!(gap > 0.0)) throw InvalidArgument("superconducting gap must be positive");
  if (!std::isfinite(alpha) || !std::isfinite(epsilon)) {
    throw InvalidArgument("alpha and epsilon must be finite");
  }
}

std::string_view mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::capacitive: return "capacitive";
    case Mechanism::flux_noise: return "flux_noise";
    case Mechanism::qp_junction: return "qp_junction";
    case Mechanism::qp_array: return "qp_array";
    case Mechanism::charge_line: return "charge_line";
    case Mechanism::flux_line: return "flux_line";
    case Mechanism::purcell: return "purcell";
  }
  return "unknown";
}

std::optional<Mechanism> parse_mechanism(std::string_view name) {
  for (Mechanism m : kAllMechanisms) {
    if (mechanism_name(m) == name) return m;
  }
  return std::nullopt;
}

double q_of_frequency(const Environment& env, double f) {
  if (!(f > 0.0)) throw InvalidArgument("quality factor requested at nonpositive frequency");
  return env.qc_eff * std::pow(kQcReferenceHz / f, env.epsilon);
}

double rate_capacitive(const Spectrum& spec, const FluxoniumParams& params, const Environment& env,
                       std::size_t i, std::size_t j) {
  const Transition tr = transition(spec, i, j);
  // 16 Ec / (hbar Q') |n|^2, with Ec / hbar = 2 pi ec.
  const double base = 16.0 * kTwoPi * params.ec / q_of_frequency(env, tr.f) * n_sq(spec, i, j);
  return thermal_split(base, tr, env.t_qubit);
}

double rate_flux_noise(const Spectrum& spec, const FluxoniumParams& params, const Environment& env,
                       std::size_t i, std::size_t j) {
  const Transition tr = transition(spec, i, j);
  if (env.a_phi == 0.0) return 0.0;
  // Coupling (2 pi El / Phi0) phi to a flux spectrum a_phi Phi0^2 (2 pi / omega)^alpha;
  // half of the golden-rule total goes each way.
  const double coupling = kTwoPi * kTwoPi * params.el;  // 2 pi El / hbar in rad/s
  const double omega = kTwoPi * tr.f;
  const double spectrum = env.a_phi * std::pow(kTwoPi / omega, env.alpha);
  return coupling * coupling * phi_sq(spec, i, j) * spectrum;
}

double rate_quasiparticle(const Spectrum& spec, const FluxoniumParams& params,
                          const Environment& env, std::size_t i, std::size_t j, QpSite site) {
  const Transition tr = transition(spec, i, j);
  if (env.x_qp == 0.0) return 0.0;
  if (tr.f > 0.1 * env.gap) {
    std::ostringstream msg;
    msg << "quasiparticle rate for " << i << "->" << j << " at " << tr.f
        << " Hz is outside the low-energy regime (gap " << env.gap << " Hz)";
    warn(msg.str());
  }
  const double root = std::sqrt(2.0 * env.gap / tr.f);
  double down = 0.0;
  if (site == QpSite::junction) {
    // 16 Ej x / (pi hbar), Ej / hbar = 2 pi ej
    down = 32.0 * params.ej * env.x_qp * root * sin_half_sq(spec, i, j);
  } else {
    down = 4.0 * params.el * env.x_qp * root * phi_sq(spec, i, j);
  }
  if (!tr.upward) return down;
  return down * std::exp(-kPlanck * tr.f / (kBoltzmann * env.t_qubit));
}

double rate_radiative(const Spectrum& spec, const FluxoniumParams& params, const Environment& env,
                      std::size_t i, std::size_t j, DriveLine line) {
  const Transition tr = transition(spec, i, j);
  constexpr double z0 = 50.0;
  const double omega = kTwoPi * tr.f;
  double base = 0.0;
  if (line == DriveLine::charge) {
    const double beta = env.c_drive / params.c_sigma();
    base = 8.0 * kElementaryCharge * kElementaryCharge / kHbar * beta * beta * omega * z0 *
           n_sq(spec, i, j);
  } else {
    const double el = kPlanck * params.el;
    base = 8.0 * std::numbers::pi * std::numbers::pi * el * el * env.m_drive * env.m_drive *
           omega / (kHbar * z0 * kFluxQuantum * kFluxQuantum) * phi_sq(spec, i, j);
  }
  return thermal_split(base, tr, env.t_qubit);
}

double feedline_mutual_inductance(const ResonatorParams& res) {
  res.validate();
  const double w = kTwoPi * res.omega_res;
  return res.z0 / w * std::sqrt(std::numbers::pi / (2.0 * res.q_res()));
}

std::complex<double> purcell_impedance(const ResonatorParams& res, double f) {
  if (!(f > 0.0)) throw InvalidArgument("impedance requested at nonpositive frequency");
  const double m = feedline_mutual_inductance(res);
  const double w = kTwoPi * f;
  const double a = w * w * m * m;
  const double z0 = res.z0;
  const double z0sq = z0 * z0;
  const double arg = std::numbers::pi * f / (2.0 * res.omega_res);
  const std::complex<double> j(0.0, 1.0);
  // Z0 (a cot + 2j Z0^2) / (2 Z0^2 cot + j a); near the cotangent poles the same
  // expression is evaluated with tan = 1/cot to stay finite.
  const double c = std::cos(arg);
  const double s = std::sin(arg);
  if (std::abs(s) >= std::abs(c)) {
    const double cot = c / s;
    return z0 * (a * cot + 2.0 * j * z0sq) / (2.0 * z0sq * cot + j * a);
  }
  const double tan = s / c;
  return z0 * (a + 2.0 * j * z0sq * tan) / (2.0 * z0sq + j * a * tan);
}

double rate_purcell(const Spectrum& spec, const FluxoniumParams& params, const ResonatorParams& res,
                    const Environment& env, std::size_t i, std::size_t j) {
  const Transition tr = transition(spec, i, j);
  if (res.g == 0.0) return 0.0;
  const double beta = coupling_capacitance(res, params.c_sigma()) / params.c_sigma();
  const double omega = kTwoPi * tr.f;
  const double base = 8.0 * kElementaryCharge * kElementaryCharge * omega / kHbar * beta * beta *
                      n_sq(spec, i, j) * purcell_impedance(res, tr.f).real();
  return thermal_split(base, tr, env.t_res);
}

namespace {

double rate_for(Mechanism m, const Spectrum& spec, const FluxoniumParams& params,
                const ResonatorParams& res, const Environment& env, std::size_t i, std::size_t j) {
  switch (m) {
    case Mechanism::capacitive: return rate_capacitive(spec, params, env, i, j);
    case Mechanism::flux_noise: return rate_flux_noise(spec, params, env, i, j);
    case Mechanism::qp_junction: return rate_quasiparticle(spec, params, env, i, j, QpSite::junction);
    case Mechanism::qp_array: return rate_quasiparticle(spec, params, env, i, j, QpSite::array);
    case Mechanism::charge_line: return rate_radiative(spec, params, env, i, j, DriveLine::charge);
    case Mechanism::flux_line: return rate_radiative(spec, params, env, i, j, DriveLine::flux);
    case Mechanism::purcell: return rate_purcell(spec, params, res, env, i, j);
  }
  throw InvalidArgument("unknown loss mechanism");
}

}  // namespace

MechanismRateTable build_mechanism_table(const Spectrum& spec, const FluxoniumParams& params,
                                         const ResonatorParams& res, const Environment& env,
                                         Mechanism mechanism) {
  env.validate();
  const auto n = static_cast<Eigen::Index>(spec.n_levels());
  MechanismRateTable table{mechanism, Eigen::MatrixXd::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      try {
        table.rates(i, j) = rate_for(mechanism, spec, params, res, env, static_cast<std::size_t>(i),
                                     static_cast<std::size_t>(j));
      } catch (const NumericalError& e) {
        std::ostringstream msg;
        msg << mechanism_name(mechanism) << " rate " << i << "->" << j << ": " << e.what();
        throw NumericalError(msg.str());
      }
    }
  }
  return table;
}

double pair_rate(const Spectrum& spec, const FluxoniumParams& params, const ResonatorParams& res,
                 const Environment& env, Mechanism mechanism, std::size_t i, std::size_t j) {
  return rate_for(mechanism, spec, params, res, env, i, j) +
         rate_for(mechanism, spec, params, res, env, j, i);
}

}  // namespace fluxrelax
