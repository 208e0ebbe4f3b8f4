#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace lrd::optim {

/// Minimization objectives. Returning +inf (or NaN) marks a point as
/// infeasible; both optimizers treat it as a rejected trial.
using Objective = std::function<double(std::span<const double> x)>;
using GradientObjective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct Result {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  double gradient_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> trace;  // best objective after every accepted iteration
};

struct NelderMeadOptions {
  std::size_t max_iterations = 500;
  double initial_step = 0.5;
  double f_tolerance = 1e-10;  // relative spread of simplex values
  double x_tolerance = 1e-8;   // simplex diameter
};

Result nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options = {});

struct BfgsOptions {
  std::size_t max_iterations = 1000;
  double gradient_tolerance = 1e-5;  // Euclidean norm
  double max_step = 5.0;             // cap on the search direction length
  // Called after every accepted iteration with the new point and gradient;
  // returning true ends the run (converged stays false).
  std::function<bool(std::span<const double> x, std::span<const double> grad)> stop;
};

Result bfgs(const GradientObjective& f, std::vector<double> x0, const BfgsOptions& options = {});

}  // namespace lrd::optim
