#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lrd {

/// Dyadic block sizes floor(N / 2^p), p = 0 .. floor(log2(N / 4)),
/// deduplicated and in descending order.
struct ScaleSchedule {
  std::vector<std::size_t> scales;
};

ScaleSchedule make_schedule(std::size_t n_total);

struct LogLogPoint {
  double ln_n = 0.0;
  double ln_stat = 0.0;
};

/// OLS fit of ln_stat on ln_n. slope_se is the usual sqrt(s^2 / Sxx).
struct ScaleFit {
  std::vector<LogLogPoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_se = 0.0;
  int dof = 0;

  double fitted(double ln_n) const { return intercept + slope * ln_n; }
};

ScaleFit fit_loglog(std::span<const LogLogPoint> points);

enum class HurstMethod { RS, DFA };

std::string_view to_string(HurstMethod method);
HurstMethod parse_hurst_method(std::string_view text);

/// t-inference on the fitted slope: 95% two-sided interval and the one-sided
/// p-value of H0: H = 0.5 against Ha: H > 0.5, both on fit.dof degrees of
/// freedom.
struct HurstEstimate {
  double h = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 0.0;
  double r_squared = 0.0;
  HurstMethod method = HurstMethod::RS;
};

HurstEstimate infer_hurst(const ScaleFit& fit, HurstMethod method);

/// Per-scale aggregate statistic (mean R/S or mean F) before taking logs.
struct ScaleStatistic {
  std::size_t scale = 0;
  std::size_t blocks = 0;
  std::size_t used_blocks = 0;
  double statistic = 0.0;
};

/// Output of rs_analysis / dfa_analysis.
struct HurstAnalysis {
  HurstEstimate estimate;
  ScaleFit fit;
  std::vector<ScaleStatistic> scales;  // only scales that entered the fit
  std::vector<std::string> warnings;
};

}  // namespace lrd
