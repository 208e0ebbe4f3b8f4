#include "lrd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/normal.hpp>

namespace lrd {

namespace {

double two_sided_normal_p(double z) {
  const boost::math::normal standard;
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(standard, std::fabs(z))), 0.0, 1.0);
}

// D'Agostino (1970) transformation of the sample skewness to ~N(0, 1).
double skew_z(double skewness, double n) {
  double y = skewness * std::sqrt(((n + 1.0) * (n + 3.0)) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));
  if (y == 0.0) y = 1.0;
  const double ratio = y / alpha;
  return delta * std::log(ratio + std::sqrt(ratio * ratio + 1.0));
}

// Anscombe-Glynn (1983) transformation of the (non-excess) sample kurtosis.
double kurt_z(double kurtosis, double n) {
  const double expected = 3.0 * (n - 1.0) / (n + 1.0);
  const double variance = 24.0 * n * (n - 2.0) * (n - 3.0) /
                          ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
  const double x = (kurtosis - expected) / std::sqrt(variance);
  const double sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                            std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
  const double a = 6.0 + 8.0 / sqrt_beta1 *
                             (2.0 / sqrt_beta1 + std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
  const double term1 = 1.0 - 2.0 / (9.0 * a);
  const double denom = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
  if (denom == 0.0) throw NumericalError("kurtosis test denominator is zero");
  const double term2 = std::copysign(std::cbrt((1.0 - 2.0 / a) / std::fabs(denom)), denom);
  return (term1 - term2) / std::sqrt(2.0 / (9.0 * a));
}

}  // namespace

MomentReport moments(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < kMinMomentSample) {
    throw InputError("moment tests need at least " + std::to_string(kMinMomentSample) +
                     " observations, got " + std::to_string(n));
  }
  const double nd = static_cast<double>(n);
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / nd;

  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double dev = v - mean;
    const double sq = dev * dev;
    m2 += sq;
    m3 += sq * dev;
    m4 += sq * sq;
  }
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  if (!(m2 > 0.0)) throw InputError("zero variance: all returns are equal");

  MomentReport report;
  report.n = n;
  report.mean = mean;
  report.stddev = std::sqrt(m2);
  report.skewness = m3 / std::pow(m2, 1.5);
  const double kurtosis = m4 / (m2 * m2);
  report.excess_kurtosis = kurtosis - 3.0;
  report.z_skew = skew_z(report.skewness, nd);
  report.z_kurt = kurt_z(kurtosis, nd);
  report.k2 = report.z_skew * report.z_skew + report.z_kurt * report.z_kurt;
  report.p_skew = two_sided_normal_p(report.z_skew);
  report.p_kurt = two_sided_normal_p(report.z_kurt);
  // chi-square(2) survival function
  report.p_omnibus = std::clamp(std::exp(-0.5 * report.k2), 0.0, 1.0);
  return report;
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw InputError("histogram of an empty sample");
  if (bins == 0) throw InputError("histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lower = lo + width * static_cast<double>(b);
    out[b].upper = (b + 1 == bins) ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    if (b >= bins) b = bins - 1;
    ++out[b].count;
  }

  const double nd = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= nd;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / nd);
  for (auto& bin : out) {
    bin.density = static_cast<double>(bin.count) / (nd * width);
    if (sd > 0.0) {
      const double z = (0.5 * (bin.lower + bin.upper) - mean) / sd;
      bin.normal_density = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
    }
  }
  return out;
}

std::vector<QQPoint> normal_qq(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double nd = static_cast<double>(sorted.size());
  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= nd;
  double var = 0.0;
  for (double v : sorted) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / nd);

  const boost::math::normal standard;
  std::vector<QQPoint> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double prob = (static_cast<double>(i) + 0.5) / nd;
    out[i].theoretical = boost::math::quantile(standard, prob);
    out[i].sample = sorted[i];
    out[i].reference = mean + sd * out[i].theoretical;
  }
  return out;
}

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw InputError("percentile of an empty sample");
  if (q < 0.0 || q > 1.0) throw InputError("percentile level outside [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(pos));
  const auto upper = std::min(lower + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lower);
  return sorted[lower] + frac * (sorted[upper] - sorted[lower]);
}

}  // namespace lrd
