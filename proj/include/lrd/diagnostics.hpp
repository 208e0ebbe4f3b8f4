#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lrd/ingest.hpp"

namespace lrd {

/// Sample moments with normality tests. Moments use the biased (1/n)
/// normalization; z_skew is D'Agostino's transformed skewness, z_kurt the
/// Anscombe-Glynn transformed kurtosis, and k2 = z_skew^2 + z_kurt^2 is
/// referred to chi-square(2). All p-values are two-sided.
struct MomentReport {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double z_skew = 0.0;
  double z_kurt = 0.0;
  double k2 = 0.0;
  double p_skew = 1.0;
  double p_kurt = 1.0;
  double p_omnibus = 1.0;
};

inline constexpr std::size_t kMinMomentSample = 20;

MomentReport moments(std::span<const double> values);
inline MomentReport moments(const ReturnSeries& returns) { return moments(returns.values); }

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double density = 0.0;  // count / (n * width)
  double normal_density = 0.0;  // fitted N(mean, std) at the bin centre
};

/// Equal-width bins spanning [min, max]; the last bin is closed on the right.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins);

struct QQPoint {
  double theoretical = 0.0;  // standard normal quantile at (i + 0.5) / n
  double sample = 0.0;       // i-th order statistic
  double reference = 0.0;    // mean + std * theoretical
};

std::vector<QQPoint> normal_qq(std::span<const double> values);

/// Linear-interpolation percentile (q in [0, 1]) of an unsorted sample.
double percentile(std::span<const double> values, double q);

}  // namespace lrd
