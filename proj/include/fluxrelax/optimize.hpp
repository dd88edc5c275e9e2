#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fluxrelax {

struct NelderMeadOptions {
  std::size_t max_iterations = 500;
  /// Converged once every vertex lies within this distance (per coordinate)
  /// of the best vertex.
  double x_tolerance = 1e-8;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Largest vertex spread at exit.
  double spread = 0.0;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Downhill simplex minimization from an explicit initial simplex of n+1 vertices.
NelderMeadResult nelder_mead(const Objective& f, std::vector<std::vector<double>> simplex,
                             const NelderMeadOptions& options = {});

}  // namespace fluxrelax
