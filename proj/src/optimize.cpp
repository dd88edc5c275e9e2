#include "fluxrelax/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fluxrelax/errors.hpp"

namespace fluxrelax {

namespace {

std::vector<double> affine(const std::vector<double>& a, const std::vector<double>& b, double t) {
  // a + t (b - a)
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + t * (b[k] - a[k]);
  return out;
}

double spread_of(const std::vector<std::vector<double>>& s, std::size_t best) {
  double d = 0.0;
  for (const auto& v : s) {
    for (std::size_t k = 0; k < v.size(); ++k) d = std::max(d, std::abs(v[k] - s[best][k]));
  }
  return d;
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<std::vector<double>> simplex,
                             const NelderMeadOptions& options) {
  if (simplex.empty()) throw InvalidArgument("simplex is empty");
  const std::size_t dim = simplex.front().size();
  if (dim == 0 || simplex.size() != dim + 1) {
    throw InvalidArgument("simplex must have one more vertex than dimensions");
  }
  for (const auto& v : simplex) {
    if (v.size() != dim) throw InvalidArgument("simplex vertices differ in dimension");
  }

  std::vector<double> values(simplex.size());
  for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = f(simplex[i]);
  std::vector<std::size_t> order(simplex.size());

  NelderMeadResult result;
  for (std::size_t iter = 0;; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    result.spread = spread_of(simplex, best);
    result.iterations = iter;
    if (result.spread < options.x_tolerance) {
      result.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i : order) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i][k] / static_cast<double>(dim);
    }

    const auto reflected = affine(centroid, simplex[worst], -options.reflection);
    const double fr = f(reflected);
    if (fr < values[best]) {
      const auto expanded = affine(centroid, simplex[worst], -options.reflection * options.expansion);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    // Contract toward the better of the worst vertex and its reflection.
    const bool outside = fr < values[worst];
    const auto contracted = outside ? affine(centroid, reflected, options.contraction)
                                    : affine(centroid, simplex[worst], options.contraction);
    const double fc = f(contracted);
    if (fc < std::min(fr, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = affine(simplex[best], simplex[i], options.shrink);
      values[i] = f(simplex[i]);
    }
  }
  const std::size_t best = order.front();
  result.x = simplex[best];
  result.value = values[best];
  return result;
}

}  // namespace fluxrelax
