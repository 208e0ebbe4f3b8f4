#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "lrd/common.hpp"
#include "lrd/optimize.hpp"

using namespace lrd;
using namespace lrd::optim;

namespace {

double rosenbrock(std::span<const double> x) {
  return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
}

double rosenbrock_grad(std::span<const double> x, std::span<double> g) {
  g[0] = -400.0 * x[0] * (x[1] - x[0] * x[0]) - 2.0 * (1.0 - x[0]);
  g[1] = 200.0 * (x[1] - x[0] * x[0]);
  return rosenbrock(x);
}

bool non_increasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] > trace[i - 1]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("Nelder-Mead finds the Rosenbrock minimum") {
  NelderMeadOptions opt;
  opt.max_iterations = 5000;
  const auto r = nelder_mead(rosenbrock, {-1.2, 1.0}, opt);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(non_increasing(r.trace));
}

TEST_CASE("BFGS finds the Rosenbrock minimum") {
  const auto r = bfgs(rosenbrock_grad, {-1.2, 1.0});
  CHECK(r.converged);
  CHECK(r.gradient_norm < 1e-5);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(non_increasing(r.trace));
  CHECK(r.evaluations >= r.iterations);
}

TEST_CASE("infeasible regions are avoided") {
  // Minimum of (x - 2)^2 restricted to x < 1 sits on the edge.
  auto f = [](std::span<const double> x, std::span<double> g) {
    if (x[0] >= 1.0) return std::numeric_limits<double>::infinity();
    g[0] = 2.0 * (x[0] - 2.0);
    return (x[0] - 2.0) * (x[0] - 2.0);
  };
  BfgsOptions opt;
  opt.max_iterations = 200;
  const auto r = bfgs(f, {0.0}, opt);
  CHECK(r.x[0] < 1.0);
  CHECK(r.x[0] > 0.99);
  CHECK(non_increasing(r.trace));
}

TEST_CASE("an infeasible start throws") {
  auto f = [](std::span<const double>) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(nelder_mead(f, {0.0, 0.0}), InputError);
  auto g = [](std::span<const double>, std::span<double>) { return std::numeric_limits<double>::infinity(); };
  CHECK_THROWS_AS(bfgs(g, {0.0}), InputError);
}

TEST_CASE("the stop hook ends a BFGS run early") {
  BfgsOptions opt;
  std::size_t calls = 0;
  opt.stop = [&](std::span<const double>, std::span<const double>) { return ++calls == 3; };
  const auto r = bfgs(rosenbrock_grad, {-1.2, 1.0}, opt);
  CHECK(calls == 3);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
}

TEST_CASE("quadratic: BFGS is exact to tolerance in few iterations") {
  auto f = [](std::span<const double> x, std::span<double> g) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double w = static_cast<double>(i + 1);
      g[i] = 2.0 * w * (x[i] - 0.5);
      v += w * (x[i] - 0.5) * (x[i] - 0.5);
    }
    return v;
  };
  const auto r = bfgs(f, std::vector<double>(6, 3.0));
  CHECK(r.converged);
  CHECK(r.iterations < 60);
  for (double v : r.x) CHECK(v == doctest::Approx(0.5).epsilon(1e-6));
}
