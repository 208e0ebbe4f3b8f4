#include "lrd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lrd/common.hpp"

namespace lrd::optim {

namespace {

double sanitize(double value) {
  return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

Result nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options) {
  const std::size_t dim = x0.size();
  Result result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    return sanitize(f(x));
  };

  std::vector<std::vector<double>> simplex(dim + 1, x0);
  std::vector<double> values(dim + 1);
  values[0] = eval(x0);
  if (!std::isfinite(values[0])) throw InputError("Nelder-Mead: initial point is infeasible");
  for (std::size_t i = 0; i < dim; ++i) {
    simplex[i + 1][i] += options.initial_step;
    values[i + 1] = eval(simplex[i + 1]);
    if (!std::isfinite(values[i + 1])) {
      simplex[i + 1][i] = x0[i] - options.initial_step;
      values[i + 1] = eval(simplex[i + 1]);
    }
  }

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim);
  std::vector<double> trial(dim);
  auto point_along = [&](double coeff, const std::vector<double>& worst) {
    std::vector<double> p(dim);
    for (std::size_t j = 0; j < dim; ++j) p[j] = centroid[j] + coeff * (worst[j] - centroid[j]);
    return p;
  };

  while (result.iterations < options.max_iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[dim - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= dim; ++i) {
      double d = 0.0;
      for (std::size_t j = 0; j < dim; ++j) d = std::max(d, std::fabs(simplex[i][j] - simplex[best][j]));
      diameter = std::max(diameter, d);
    }
    const double spread = values[worst] - values[best];
    if (std::isfinite(spread) && spread <= options.f_tolerance * (std::fabs(values[best]) + 1e-300) &&
        diameter <= options.x_tolerance) {
      result.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(dim);

    const auto reflected = point_along(-1.0, simplex[worst]);
    const double f_reflected = eval(reflected);
    if (f_reflected < values[best]) {
      const auto expanded = point_along(-2.0, simplex[worst]);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
    } else if (f_reflected < values[second]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
    } else {
      const bool outside = f_reflected < values[worst];
      const auto contracted = point_along(outside ? -0.5 : 0.5, simplex[worst]);
      const double f_contracted = eval(contracted);
      if (f_contracted < std::min(f_reflected, values[worst])) {
        simplex[worst] = contracted;
        values[worst] = f_contracted;
      } else {
        for (std::size_t i = 0; i <= dim; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < dim; ++j) {
            simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
          }
          values[i] = eval(simplex[i]);
        }
      }
    }
    ++result.iterations;
    result.trace.push_back(*std::min_element(values.begin(), values.end()));
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
  result.value = *best_it;
  return result;
}

Result bfgs(const GradientObjective& f, std::vector<double> x0, const BfgsOptions& options) {
  const std::size_t dim = x0.size();
  Result result;
  std::vector<double> x = std::move(x0);
  std::vector<double> g(dim);
  auto eval = [&](std::span<const double> point, std::span<double> grad) {
    ++result.evaluations;
    const double v = sanitize(f(point, grad));
    if (std::isfinite(v)) {
      for (double gi : grad) {
        if (!std::isfinite(gi)) return std::numeric_limits<double>::infinity();
      }
    }
    return v;
  };

  double fx = eval(x, g);
  if (!std::isfinite(fx)) throw InputError("BFGS: initial point is infeasible");

  // Inverse Hessian approximation, row-major.
  std::vector<double> h(dim * dim, 0.0);
  auto reset_identity = [&] {
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i) h[i * dim + i] = 1.0;
  };
  reset_identity();
  bool scaled = false;
  bool is_identity = true;

  std::vector<double> p(dim);
  std::vector<double> x_new(dim);
  std::vector<double> g_new(dim);
  std::vector<double> s(dim);
  std::vector<double> y(dim);
  std::vector<double> hy(dim);

  while (true) {
    result.gradient_norm = norm(g);
    if (result.gradient_norm < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iterations) break;

    for (std::size_t i = 0; i < dim; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < dim; ++j) acc -= h[i * dim + j] * g[j];
      p[i] = acc;
    }
    double slope = dot(p, g);
    if (!(slope < 0.0)) {
      reset_identity();
      is_identity = true;
      scaled = false;
      for (std::size_t i = 0; i < dim; ++i) p[i] = -g[i];
      slope = dot(p, g);
    }
    const double p_norm = norm(p);
    if (p_norm > options.max_step) {
      const double shrink = options.max_step / p_norm;
      for (double& pi : p) pi *= shrink;
      slope *= shrink;
    }

    // Backtracking line search under the Armijo condition.
    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (std::size_t i = 0; i < dim; ++i) x_new[i] = x[i] + step * p[i];
      if (std::equal(x_new.begin(), x_new.end(), x.begin())) break;  // step below resolution
      f_new = eval(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      if (std::isfinite(f_new)) {
        // Safeguarded quadratic interpolation of the step.
        const double denom = 2.0 * (f_new - fx - step * slope);
        double next = denom > 0.0 ? -slope * step * step / denom : 0.5 * step;
        step = std::clamp(next, 0.1 * step, 0.5 * step);
      } else {
        step *= 0.25;
      }
    }
    if (!accepted) {
      if (is_identity) break;  // stalled along steepest descent
      reset_identity();
      is_identity = true;
      scaled = false;
      continue;
    }

    for (std::size_t i = 0; i < dim; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * norm(s) * norm(y)) {
      if (!scaled) {
        const double gamma = sy / dot(y, y);
        for (double& hij : h) hij *= gamma;
        scaled = true;
      }
      for (std::size_t i = 0; i < dim; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < dim; ++j) acc += h[i * dim + j] * y[j];
        hy[i] = acc;
      }
      const double rho = 1.0 / sy;
      const double yhy = dot(y, hy);
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
          h[i * dim + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
      }
      is_identity = false;
    }

    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    ++result.iterations;
    result.trace.push_back(fx);
    if (options.stop && options.stop(x, g)) {
      result.gradient_norm = norm(g);
      break;
    }
  }

  result.x = std::move(x);
  result.value = fx;
  return result;
}

}  // namespace lrd::optim
