#include "fluxrelax/hamiltonian.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include "fluxrelax/constants.hpp"
#include "fluxrelax/errors.hpp"
#include "fluxrelax/parallel.hpp"

namespace fluxrelax {

namespace {

using constants::kTwoPi;

// Matrix elements of the displacement operator exp(i beta (a + a^dag)) in the
// Fock basis. For m = n + k:
//   <m|D|n> = i^k beta^k sqrt(n!/m!) exp(-beta^2/2) L_n^(k)(beta^2),
// and the matrix is symmetric. The even-k part is cos(beta (a + a^dag)), the
// odd-k part is i sin(beta (a + a^dag)). Returns {cos, sin}.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> displacement_cos_sin(std::size_t dim, double beta) {
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  const double x = beta * beta;

  for (Eigen::Index k = 0; k < d; ++k) {
    // g_n = beta^k sqrt(n!/(n+k)!) exp(-x/2) L_n^(k)(x), normalized recurrence.
    const double kd = static_cast<double>(k);
    double g_prev = 0.0;
    double g = std::exp(kd * std::log(beta) - 0.5 * std::lgamma(kd + 1.0) - 0.5 * x);
    // i^k: k mod 4 -> 1, i, -1, -i
    const double sign = (k % 4 == 0 || k % 4 == 1) ? 1.0 : -1.0;
    for (Eigen::Index n = 0; n + k < d; ++n) {
      const Eigen::Index m = n + k;
      if (k % 2 == 0) {
        c(m, n) = sign * g;
        c(n, m) = sign * g;
      } else {
        s(m, n) = sign * g;
        s(n, m) = sign * g;
      }
      const double nd = static_cast<double>(n);
      const double g_next =
          ((2.0 * nd + 1.0 + kd - x) * g - std::sqrt(nd * (nd + kd)) * g_prev) /
          std::sqrt((nd + 1.0) * (nd + kd + 1.0));
      g_prev = g;
      g = g_next;
    }
  }
  return {std::move(c), std::move(s)};
}

struct OscillatorBasis {
  Eigen::MatrixXd theta;      // phi - 2 pi phi_ext
  Eigen::MatrixXd n_imag;     // n = i * n_imag
};

OscillatorBasis oscillator_basis(std::size_t dim, double theta_zpf) {
  const auto d = static_cast<Eigen::Index>(dim);
  OscillatorBasis b;
  b.theta = Eigen::MatrixXd::Zero(d, d);
  b.n_imag = Eigen::MatrixXd::Zero(d, d);
  const double n_zpf = 0.5 / theta_zpf;
  for (Eigen::Index m = 0; m < d; ++m) {
    if (m + 1 < d) {
      const double amp = std::sqrt(static_cast<double>(m + 1));
      b.theta(m, m + 1) = theta_zpf * amp;
      b.theta(m + 1, m) = theta_zpf * amp;
      // n = i n_zpf (a^dag - a): <m+1|n|m> = i n_zpf sqrt(m+1), <m|n|m+1> = -i ...
      b.n_imag(m + 1, m) = n_zpf * amp;
      b.n_imag(m, m + 1) = -n_zpf * amp;
    }
  }
  return b;
}

Eigen::MatrixXd hamiltonian(const FluxoniumParams& params, FluxBias bias, std::size_t dim) {
  const double theta_zpf = std::pow(2.0 * params.ec / params.el, 0.25);
  const double plasma = std::sqrt(8.0 * params.ec * params.el);
  // Reduce the bias to [0, 1); only the offset of phi's diagonal depends on it.
  const double shift = kTwoPi * (bias.phi_ext - std::floor(bias.phi_ext));
  auto [cos_t, sin_t] = displacement_cos_sin(dim, theta_zpf);
  // cos(theta + shift) = cos(theta) cos(shift) - sin(theta) sin(shift)
  Eigen::MatrixXd h = -params.ej * (std::cos(shift) * cos_t - std::sin(shift) * sin_t);
  for (Eigen::Index m = 0; m < h.rows(); ++m) h(m, m) += plasma * (static_cast<double>(m) + 0.5);
  return h;
}

Eigen::VectorXd energies_only(const FluxoniumParams& params, FluxBias bias, std::size_t dim) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian(params, bias, dim),
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the fluxonium Hamiltonian failed");
  }
  return solver.eigenvalues();
}

}  // namespace

void FluxoniumParams::validate() const {
  if (!(ej > 0.0) || !(ec > 0.0) || !(el > 0.0) || !std::isfinite(ej) || !std::isfinite(ec) ||
      !std::isfinite(el)) {
    std::ostringstream msg;
    msg << "fluxonium energies must be finite and positive (ej=" << ej << ", ec=" << ec
        << ", el=" << el << ")";
    throw InvalidArgument(msg.str());
  }
}

double FluxoniumParams::c_sigma() const {
  const double e = constants::kElementaryCharge;
  return e * e / (2.0 * constants::kPlanck * ec);
}

Spectrum::Spectrum(Eigen::VectorXd energies, Eigen::MatrixXcd n_elem, Eigen::MatrixXd phi_elem,
                   Eigen::MatrixXd sin_half_elem, std::size_t basis_dim, double phi_ext)
    : energies_(std::move(energies)),
      n_elem_(std::move(n_elem)),
      phi_elem_(std::move(phi_elem)),
      sin_half_elem_(std::move(sin_half_elem)),
      basis_dim_(basis_dim),
      phi_ext_(phi_ext) {}

double Spectrum::transition_frequency(std::size_t i, std::size_t j) const {
  if (i >= n_levels() || j >= n_levels()) {
    std::ostringstream msg;
    msg << "level index out of range: (" << i << ", " << j << ") with " << n_levels()
        << " levels";
    throw InvalidArgument(msg.str());
  }
  return energies_(static_cast<Eigen::Index>(j)) - energies_(static_cast<Eigen::Index>(i));
}

Spectrum Spectrum::truncated(std::size_t n) const {
  if (n > n_levels()) throw InvalidArgument("cannot truncate spectrum to more levels than it holds");
  const auto k = static_cast<Eigen::Index>(n);
  return Spectrum(energies_.head(k), n_elem_.topLeftCorner(k, k), phi_elem_.topLeftCorner(k, k),
                  sin_half_elem_.topLeftCorner(k, k), basis_dim_, phi_ext_);
}

double transition_frequency(const Spectrum& spec, std::size_t i, std::size_t j) {
  return spec.transition_frequency(i, j);
}

Spectrum diagonalize_fixed(const FluxoniumParams& params, FluxBias bias, std::size_t n_levels,
                           std::size_t basis_dim) {
  params.validate();
  if (n_levels < 2) throw InvalidArgument("diagonalize needs at least two levels");
  if (basis_dim < n_levels) throw InvalidArgument("basis smaller than requested level count");
  if (!std::isfinite(bias.phi_ext)) throw InvalidArgument("flux bias must be finite");

  const double theta_zpf = std::pow(2.0 * params.ec / params.el, 0.25);
  const OscillatorBasis basis = oscillator_basis(basis_dim, theta_zpf);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian(params, bias, basis_dim));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the fluxonium Hamiltonian failed");
  }
  const auto k = static_cast<Eigen::Index>(n_levels);
  const Eigen::MatrixXd vecs = solver.eigenvectors().leftCols(k);

  // sin(phi/2) = sin(theta/2) cos(pi phi_ext) + cos(theta/2) sin(pi phi_ext); the
  // half-angle uses the unreduced bias so that the sign convention follows phi_ext.
  auto [cos_half, sin_half] = displacement_cos_sin(basis_dim, 0.5 * theta_zpf);
  const double half_shift = 0.5 * kTwoPi * bias.phi_ext;
  const Eigen::MatrixXd sin_half_phi =
      std::cos(half_shift) * sin_half + std::sin(half_shift) * cos_half;

  Eigen::MatrixXd phi = vecs.transpose() * basis.theta * vecs;
  phi.diagonal().array() += kTwoPi * bias.phi_ext;
  const Eigen::MatrixXd n_imag = vecs.transpose() * basis.n_imag * vecs;
  Eigen::MatrixXcd n_elem(k, k);
  n_elem.real().setZero();
  n_elem.imag() = n_imag;

  return Spectrum(solver.eigenvalues().head(k), std::move(n_elem), std::move(phi),
                  vecs.transpose() * sin_half_phi * vecs, basis_dim, bias.phi_ext);
}

Spectrum diagonalize(const FluxoniumParams& params, FluxBias bias, std::size_t n_levels,
                     const DiagonalizeOptions& options) {
  params.validate();
  const double scale = params.ej + params.ec + params.el;
  std::size_t dim = std::max(options.basis_dim, n_levels);
  Eigen::VectorXd current = energies_only(params, bias, dim);
  double last_delta = 0.0;
  while (dim + options.basis_step <= options.max_basis_dim) {
    const Eigen::VectorXd next = energies_only(params, bias, dim + options.basis_step);
    last_delta = 0.0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n_levels); ++i) {
      const double rel = std::abs(next(i) - current(i)) / std::max(std::abs(next(i)), scale);
      last_delta = std::max(last_delta, rel);
    }
    if (last_delta < options.tolerance) return diagonalize_fixed(params, bias, n_levels, dim);
    current = next;
    dim += options.basis_step;
  }
  std::ostringstream msg;
  msg << "fluxonium spectrum did not converge up to basis dimension " << options.max_basis_dim
      << " (last relative change " << last_delta << ")";
  throw ConvergenceError(msg.str(), last_delta);
}

double flux_dispersion(const Spectrum& spec, const FluxoniumParams& params) {
  // dH/dphi_ext = -2 pi El (phi - 2 pi phi_ext); energies in Hz, result in rad/s per Phi0.
  const double offset = kTwoPi * spec.phi_ext();
  const double d0 = -kTwoPi * params.el * (spec.phi_elem()(0, 0) - offset);
  const double d1 = -kTwoPi * params.el * (spec.phi_elem()(1, 1) - offset);
  return kTwoPi * (d1 - d0);
}

double flux_dispersion(const FluxoniumParams& params, FluxBias bias,
                       const DiagonalizeOptions& options) {
  return flux_dispersion(diagonalize(params, bias, 2, options), params);
}

std::vector<Spectrum> spectrum_vs_flux(const FluxoniumParams& params, std::span<const FluxBias> grid,
                                       std::size_t n_levels, const DiagonalizeOptions& options) {
  if (grid.empty()) throw InvalidArgument("flux grid is empty");
  std::vector<Spectrum> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    try {
      out[i] = diagonalize(params, grid[i], n_levels, options);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "flux grid point " << i << " (phi_ext=" << grid[i].phi_ext << "): " << e.what();
      throw SweepError(msg.str(), i, std::current_exception());
    }
  });
  return out;
}

double fold_flux(double phi_ext) {
  double r = phi_ext - std::floor(phi_ext);
  if (r > 0.5) r = 1.0 - r;
  return r;
}

}  // namespace fluxrelax
