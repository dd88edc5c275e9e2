#include "fluxrelax/statistics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>

#include "fluxrelax/errors.hpp"

namespace fluxrelax {

namespace {

void check_nu(double nu) {
  if (!(nu > 0.0) || std::isnan(nu)) throw InvalidArgument("degrees of freedom must be positive");
}

struct Moments {
  double mean;
  double var;
  double n;
};

Moments moments(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / (n - 1.0), n};
}

}  // namespace

double t_pdf(double t, double nu) {
  check_nu(nu);
  const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(std::numbers::pi * nu);
  return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
}

double t_upper_tail(double t, double nu) {
  check_nu(nu);
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double a = std::abs(t);
  // P(|T| > a) = I_{nu/(nu+a^2)}(nu/2, 1/2)
  const double x = nu / (nu + a * a);
  const double two_sided = a == 0.0 ? 1.0 : boost::math::ibeta(0.5 * nu, 0.5, x);
  return t >= 0.0 ? 0.5 * two_sided : 1.0 - 0.5 * two_sided;
}

double t_upper_tail_quadrature(double t, double nu) {
  check_nu(nu);
  if (t < 0.0) return 1.0 - t_upper_tail_quadrature(-t, nu);
  double error = 0.0;
  const double tail = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [nu](double u) { return t_pdf(u, nu); }, t, std::numeric_limits<double>::infinity(), 15,
      1e-14, &error);
  return tail;
}

double critical_t(double alpha, double nu) {
  check_nu(nu);
  if (!(alpha > 0.0) || alpha > 1.0) throw InvalidArgument("alpha must lie in (0, 1]");
  if (alpha == 1.0) return 0.0;
  const double target = 0.5 * alpha;
  double hi = 1.0;
  while (t_upper_tail(hi, nu) > target) hi *= 2.0;
  auto f = [&](double t) { return t_upper_tail(t, nu) - target; };
  std::uintmax_t iters = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      f, 0.0, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (bracket.first + bracket.second);
}

WelchResult welch_t_test(std::span<const double> sample1, std::span<const double> sample2,
                         double alpha) {
  if (sample1.size() < 2 || sample2.size() < 2) {
    throw InvalidArgument("Welch's test needs at least two values per sample");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  const Moments a = moments(sample1);
  const Moments b = moments(sample2);
  const double va = a.var / a.n;
  const double vb = b.var / b.n;
  const double se2 = va + vb;
  if (!(se2 > 0.0)) throw NumericalError("both samples have zero variance; the statistic is undefined");

  WelchResult r;
  r.alpha = alpha;
  r.mean1 = a.mean;
  r.mean2 = b.mean;
  const double diff = a.mean - b.mean;
  const double se = std::sqrt(se2);
  r.t0 = diff / se;
  r.nu = se2 * se2 / (va * va / (a.n - 1.0) + vb * vb / (b.n - 1.0));
  r.p_value = std::min(1.0, 2.0 * t_upper_tail(std::abs(r.t0), r.nu));

  const double p_quad = std::min(1.0, 2.0 * t_upper_tail_quadrature(std::abs(r.t0), r.nu));
  if (std::abs(p_quad - r.p_value) > 1e-9) {
    std::ostringstream msg;
    msg << "p-value paths disagree (beta " << r.p_value << ", quadrature " << p_quad << ")";
    throw NumericalError(msg.str());
  }
  const double half = critical_t(alpha, r.nu) * se;
  r.ci_low = diff - half;
  r.ci_high = diff + half;
  return r;
}

std::pair<double, double> ci_percent(const WelchResult& result, double reference_mean) {
  if (reference_mean == 0.0 || !std::isfinite(reference_mean)) {
    throw InvalidArgument("reference mean must be finite and nonzero");
  }
  return {100.0 * result.ci_low / reference_mean, 100.0 * result.ci_high / reference_mean};
}

}  // namespace fluxrelax
