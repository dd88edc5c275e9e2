#include "fluxrelax/resonator.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fluxrelax/constants.hpp"
#include "fluxrelax/errors.hpp"

namespace fluxrelax {

void ResonatorParams::validate() const {
  if (!(omega_res > 0.0) || !std::isfinite(omega_res)) {
    throw InvalidArgument("resonator frequency must be positive");
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw InvalidArgument("resonator linewidth must be positive");
  }
  if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidArgument("coupling g must be nonnegative");
  if (!(z0 > 0.0) || !std::isfinite(z0)) throw InvalidArgument("line impedance must be positive");
}

double dispersive_shift(const Spectrum& spec, const ResonatorParams& res, std::size_t state,
                        double guard_band) {
  res.validate();
  const std::size_t n = spec.n_levels();
  if (state >= n) {
    std::ostringstream msg;
    msg << "state " << state << " out of range for " << n << " levels";
    throw InvalidArgument(msg.str());
  }
  const auto i = static_cast<Eigen::Index>(state);
  double chi = 0.0;
  for (std::size_t jj = 0; jj < n; ++jj) {
    if (jj == state) continue;
    const auto j = static_cast<Eigen::Index>(jj);
    const double w = spec.energies()(j) - spec.energies()(i);
    if (std::abs(std::abs(w) - res.omega_res) < guard_band) {
      std::ostringstream msg;
      msg << "transition " << state << "->" << jj << " at " << std::abs(w)
          << " Hz collides with the resonator at " << res.omega_res << " Hz";
      throw ResonanceCollision(msg.str(), state, jj);
    }
    chi += 2.0 * res.g * res.g * std::norm(spec.n_elem()(i, j)) * w /
           (w * w - res.omega_res * res.omega_res);
  }
  return chi;
}

std::vector<double> dispersive_shifts(const Spectrum& spec, const ResonatorParams& res,
                                      double guard_band) {
  std::vector<double> chi(spec.n_levels());
  for (std::size_t i = 0; i < chi.size(); ++i) chi[i] = dispersive_shift(spec, res, i, guard_band);
  return chi;
}

std::complex<double> s21(const ResonatorParams& res, double chi_i, double probe) {
  const double q = res.q_res();
  const double dressed = res.omega_res + chi_i;
  const double detuning = probe - dressed;
  return 1.0 - 1.0 / std::complex<double>(1.0, 2.0 * q * detuning / dressed);
}

Rotation rotate_for_contrast(std::span<const std::complex<double>> points) {
  if (points.size() < 2) throw InvalidArgument("rotation needs at least two points");
  // Re(e^{ia} d) = |d| cos(arg d + a) is extremal at a = -arg d (mod pi).
  const std::complex<double> d = points[0] - points[1];
  double angle = 0.0;
  if (std::abs(d) > 0.0) {
    angle = std::fmod(-std::arg(d), std::numbers::pi);
    if (angle < 0.0) angle += std::numbers::pi;
    if (angle >= std::numbers::pi) angle = 0.0;
  }
  Rotation out;
  out.angle = angle;
  const std::complex<double> phase = std::polar(1.0, angle);
  out.points.reserve(points.size());
  for (const auto& p : points) out.points.push_back(p * phase);
  return out;
}

DressedResponse dressed_response(const Spectrum& spec, const ResonatorParams& res,
                                 double guard_band) {
  DressedResponse out;
  out.chi = dispersive_shifts(spec, res, guard_band);
  const double probe = res.omega_res + out.chi[0];
  std::vector<std::complex<double>> raw;
  raw.reserve(out.chi.size());
  for (double c : out.chi) raw.push_back(s21(res, c, probe));
  Rotation rot = rotate_for_contrast(raw);
  out.rotation_angle = rot.angle;
  out.s21_points = std::move(rot.points);
  return out;
}

double coupling_capacitance(const ResonatorParams& res, double c_sigma) {
  using namespace constants;
  if (!(c_sigma > 0.0)) throw InvalidArgument("qubit capacitance must be positive");
  const double g = kTwoPi * res.g;
  const double w = kTwoPi * res.omega_res;
  return kHbar * g * c_sigma / (2.0 * kElementaryCharge * w) *
         std::sqrt(std::numbers::pi / (2.0 * kHbar * res.z0));
}

}  // namespace fluxrelax
