#include "lrd/scalefit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "lrd/common.hpp"

namespace lrd {

ScaleSchedule make_schedule(std::size_t n_total) {
  if (n_total < 16) {
    throw InputError("series too short: scale schedule needs at least 16 points, got " +
                     std::to_string(n_total));
  }
  // floor(log2(N / 4)) without floating point: largest p with 4 * 2^p <= N.
  std::size_t p_max = 0;
  while ((std::size_t{4} << (p_max + 1)) <= n_total) ++p_max;

  ScaleSchedule schedule;
  for (std::size_t p = 0; p <= p_max; ++p) {
    const std::size_t n = n_total >> p;
    if (schedule.scales.empty() || schedule.scales.back() != n) schedule.scales.push_back(n);
  }
  return schedule;
}

ScaleFit fit_loglog(std::span<const LogLogPoint> points) {
  if (points.size() < 3) {
    throw InputError("log-log fit needs at least 3 points, got " + std::to_string(points.size()));
  }
  const double count = static_cast<double>(points.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& pt : points) {
    mean_x += pt.ln_n;
    mean_y += pt.ln_stat;
  }
  mean_x /= count;
  mean_y /= count;

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& pt : points) {
    const double dx = pt.ln_n - mean_x;
    const double dy = pt.ln_stat - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InputError("log-log fit: all ln n values are identical");

  ScaleFit fit;
  fit.points.assign(points.begin(), points.end());
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  fit.dof = static_cast<int>(points.size()) - 2;

  double ssr = 0.0;
  for (const auto& pt : points) {
    const double resid = pt.ln_stat - fit.fitted(pt.ln_n);
    ssr += resid * resid;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  fit.slope_se = std::sqrt(ssr / fit.dof / sxx);
  return fit;
}

std::string_view to_string(HurstMethod method) {
  return method == HurstMethod::RS ? "rs" : "dfa";
}

HurstMethod parse_hurst_method(std::string_view text) {
  if (text == "rs") return HurstMethod::RS;
  if (text == "dfa") return HurstMethod::DFA;
  throw InputError("unknown method '" + std::string(text) + "' (valid: rs, dfa)");
}

HurstEstimate infer_hurst(const ScaleFit& fit, HurstMethod method) {
  if (fit.dof < 1) throw InputError("Hurst inference needs at least one residual degree of freedom");
  HurstEstimate est;
  est.h = fit.slope;
  est.r_squared = fit.r_squared;
  est.method = method;

  if (!(fit.slope_se > 0.0)) {
    // Exact fit: the test statistic is +-infinity (or 0/0 at the null).
    est.ci_low = est.ci_high = fit.slope;
    est.p_value = fit.slope > 0.5 ? 0.0 : (fit.slope < 0.5 ? 1.0 : 0.5);
    return est;
  }
  const boost::math::students_t dist(static_cast<double>(fit.dof));
  const double t_crit = boost::math::quantile(boost::math::complement(dist, 0.025));
  est.ci_low = fit.slope - t_crit * fit.slope_se;
  est.ci_high = fit.slope + t_crit * fit.slope_se;
  const double t_stat = (fit.slope - 0.5) / fit.slope_se;
  est.p_value = std::clamp(boost::math::cdf(boost::math::complement(dist, t_stat)), 0.0, 1.0);
  return est;
}

}  // namespace lrd
