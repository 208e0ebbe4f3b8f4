#include "lrd/hurst_dfa.hpp"

#include <cmath>
#include <string>

namespace lrd {

namespace {
constexpr std::size_t kMinDfaScale = 4;
}

std::vector<double> profile(std::span<const double> returns) {
  if (returns.size() < 2) throw InputError("profile needs at least 2 values");
  double mean = 0.0;
  for (double v : returns) mean += v;
  mean /= static_cast<double>(returns.size());

  std::vector<double> out(returns.size());
  double cumulative = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    cumulative += returns[i] - mean;
    out[i] = cumulative;
  }
  return out;
}

double block_fluctuation(std::span<const double> segment) {
  const std::size_t size = segment.size();
  if (size < kMinDfaScale) {
    throw InputError("DFA segment needs at least 4 points, got " + std::to_string(size));
  }
  const double n = static_cast<double>(size);
  const double mean_i = 0.5 * (n + 1.0);
  const double sxx = n * (n * n - 1.0) / 12.0;

  double mean_y = 0.0;
  for (double y : segment) mean_y += y;
  mean_y /= n;

  double sxy = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    sxy += (static_cast<double>(k + 1) - mean_i) * (segment[k] - mean_y);
  }
  const double slope = sxy / sxx;
  const double intercept = mean_y - slope * mean_i;

  double sum_sq = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    const double resid = segment[k] - (slope * static_cast<double>(k + 1) + intercept);
    sum_sq += resid * resid;
  }
  return std::sqrt(sum_sq / n);
}

HurstAnalysis dfa_analysis(std::span<const double> returns) {
  if (returns.size() < 16) {
    throw InputError("series too short: DFA needs at least 16 returns, got " +
                     std::to_string(returns.size()));
  }
  const auto schedule = make_schedule(returns.size());
  const auto y = profile(returns);
  const std::span<const double> prof(y);

  HurstAnalysis out;
  std::vector<LogLogPoint> points;
  for (std::size_t n : schedule.scales) {
    if (n < kMinDfaScale) continue;
    const std::size_t blocks = returns.size() / n;
    double total = 0.0;
    for (std::size_t v = 0; v < blocks; ++v) total += block_fluctuation(prof.subspan(v * n, n));
    const double f = total / static_cast<double>(blocks);
    if (!(f > 0.0)) {
      out.warnings.push_back("scale " + std::to_string(n) + ": F(n) = 0 (profile linear in every block); scale dropped");
      continue;
    }
    out.scales.push_back({n, blocks, blocks, f});
    points.push_back({std::log(static_cast<double>(n)), std::log(f)});
  }
  if (points.size() < 3) {
    throw NumericalError("DFA: fewer than 3 usable scales");
  }
  out.fit = fit_loglog(points);
  out.estimate = infer_hurst(out.fit, HurstMethod::DFA);
  return out;
}

}  // namespace lrd
