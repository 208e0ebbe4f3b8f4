#include "lrd/hurst_rs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lrd {

double rs_statistic(std::span<const double> block) {
  if (block.size() < 2) throw InputError("R/S block needs at least 2 values");
  const auto [lo, hi] = std::minmax_element(block.begin(), block.end());
  if (*lo == *hi) throw DegenerateBlockError("constant block: standard deviation is zero");

  const double n = static_cast<double>(block.size());
  double mean = 0.0;
  for (double v : block) mean += v;
  mean /= n;

  double cumulative = 0.0;
  double y_max = -INFINITY;
  double y_min = INFINITY;
  double sum_sq = 0.0;
  for (double v : block) {
    const double dev = v - mean;
    cumulative += dev;
    y_max = std::max(y_max, cumulative);
    y_min = std::min(y_min, cumulative);
    sum_sq += dev * dev;
  }
  const double s = std::sqrt(sum_sq / n);
  if (!(s > 0.0)) throw DegenerateBlockError("constant block: standard deviation is zero");
  return (y_max - y_min) / s;
}

HurstAnalysis rs_analysis(std::span<const double> returns) {
  if (returns.size() < 16) {
    throw InputError("series too short: R/S analysis needs at least 16 returns, got " +
                     std::to_string(returns.size()));
  }
  const auto schedule = make_schedule(returns.size());
  HurstAnalysis out;
  std::vector<LogLogPoint> points;

  for (std::size_t n : schedule.scales) {
    const std::size_t blocks = returns.size() / n;
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < blocks; ++k) {
      try {
        total += rs_statistic(returns.subspan(k * n, n));
        ++used;
      } catch (const DegenerateBlockError&) {
        // skipped: R/S undefined for a constant block
      }
    }
    if (used < blocks && used > 0) {
      out.warnings.push_back("scale " + std::to_string(n) + ": skipped " +
                             std::to_string(blocks - used) + " constant block(s)");
    }
    if (used == 0) {
      out.warnings.push_back("scale " + std::to_string(n) + ": every block is constant; scale dropped");
      continue;
    }
    const double stat = total / static_cast<double>(used);
    if (!(stat > 0.0)) {
      out.warnings.push_back("scale " + std::to_string(n) + ": zero R/S; scale dropped");
      continue;
    }
    out.scales.push_back({n, blocks, used, stat});
    points.push_back({std::log(static_cast<double>(n)), std::log(stat)});
  }
  if (points.size() < 3) {
    throw NumericalError("R/S analysis: fewer than 3 usable scales");
  }
  out.fit = fit_loglog(points);
  out.estimate = infer_hurst(out.fit, HurstMethod::RS);
  return out;
}

}  // namespace lrd
