#pragma once

#include <span>
#include <utility>

namespace fluxrelax {

struct WelchResult {
  double t0 = 0.0;
  double nu = 0.0;
  double p_value = 1.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double alpha = 0.05;
  double mean1 = 0.0;
  double mean2 = 0.0;
};

/// Student t probability density.
double t_pdf(double t, double nu);

/// Upper tail P(T > t) for t >= 0, from the regularized incomplete beta function.
double t_upper_tail(double t, double nu);

/// Same tail by adaptive quadrature of t_pdf.
double t_upper_tail_quadrature(double t, double nu);

/// t such that P(T > t) = alpha / 2.
double critical_t(double alpha, double nu);

/// Welch's unequal-variance two-sided test of mean1 - mean2.
WelchResult welch_t_test(std::span<const double> sample1, std::span<const double> sample2,
                         double alpha = 0.05);

/// Confidence interval expressed as a percentage of `reference_mean`.
std::pair<double, double> ci_percent(const WelchResult& result, double reference_mean);

}  // namespace fluxrelax
