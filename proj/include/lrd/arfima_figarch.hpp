#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lrd/common.hpp"
#include "lrd/ingest.hpp"

namespace lrd {

inline constexpr std::size_t kDefaultTruncationLag = 1000;

/// Binomial weights of (1 - L)^d: pi_0 = 1, pi_k = pi_{k-1} (k - 1 - d) / k.
struct FracDiffKernel {
  double d = 0.0;
  std::vector<double> weights;  // pi_0 .. pi_L
};

FracDiffKernel fracdiff_weights(double d, std::size_t lag);

/// ARFIMA(1, d_m, 1) mean with FIGARCH(1, d_v, 1) variance and standardized
/// Student-t innovations:
///   (1 - phi L)(1 - L)^d_m (y_t - mu) = (1 + theta L) eps_t,  eps_t = sigma_t z_t,
///   sigma_t^2 = omega / (1 - beta) + sum_k lambda_k eps_{t-k}^2,
///   lambda(L) = 1 - (1 - alpha L)(1 - L)^d_v / (1 - beta L).
struct ArfimaFigarchParams {
  double mu = 0.0;
  double phi = 0.0;
  double theta = 0.0;
  double d_m = 0.0;
  double omega = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double d_v = 0.0;
  double nu = 8.0;
};

inline constexpr std::size_t kParamCount = 9;
using ParamVector = std::array<double, kParamCount>;

/// Field order used by ParamVector and by every per-parameter array.
inline constexpr std::array<std::string_view, kParamCount> kParamNames = {
    "mu", "phi", "theta", "d_m", "omega", "alpha", "beta", "d_v", "nu"};

ParamVector to_vector(const ArfimaFigarchParams& params);
ArfimaFigarchParams from_vector(const ParamVector& values);

/// lambda_0 .. lambda_L of the truncated ARCH(inf) representation
/// (lambda_0 = 0).
std::vector<double> arch_weights(const ArfimaFigarchParams& params, std::size_t lag);

/// Throws InputError naming the first violated constraint: |phi|, |theta| < 1,
/// d_m in (-0.5, 0.5), omega > 0, beta in [0, 1), d_v in [0, 1), nu > 2, and
/// lambda_k >= 0 up to the truncation lag.
void validate(const ArfimaFigarchParams& params, std::size_t lag = kDefaultTruncationLag);

/// Simulates burn_in + n steps and returns the last n. Deterministic in seed.
ReturnSeries simulate(const ArfimaFigarchParams& params, std::size_t n, std::size_t burn_in,
                      std::uint64_t seed, std::size_t lag = kDefaultTruncationLag,
                      Frequency frequency = Frequency::Daily);

/// Conditional Student-t log-likelihood of a return sample. ARFIMA residuals
/// use zero pre-sample values; the variance filter uses mean(eps^2) for
/// pre-sample squared residuals.
class ArfimaFigarchLikelihood {
 public:
  ArfimaFigarchLikelihood(std::span<const double> returns, std::size_t lag = kDefaultTruncationLag);

  /// -inf outside the admissible domain.
  double operator()(const ArfimaFigarchParams& params) const;

  /// Same value plus the exact gradient with respect to the natural
  /// parameters (ParamVector order), by reverse accumulation through both
  /// filters.
  double value_and_gradient(const ArfimaFigarchParams& params, ParamVector& gradient) const;

  /// Conditional residuals eps_t and variances sigma_t^2; empty on an
  /// infeasible point.
  std::pair<std::vector<double>, std::vector<double>> filter(const ArfimaFigarchParams& params) const;

  std::size_t size() const { return returns_.size(); }
  std::size_t lag() const { return lag_; }

 private:
  double evaluate(const ArfimaFigarchParams& params, ParamVector* gradient) const;

  std::vector<double> returns_;
  std::size_t lag_;
};

struct FitOptions {
  std::size_t truncation_lag = kDefaultTruncationLag;
  std::size_t max_iterations = 2000;
  double gradient_tolerance = 1e-5;
  std::size_t simplex_iterations = 300;
  std::optional<ArfimaFigarchParams> init;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct FitResult {
  ArfimaFigarchParams params;
  double log_likelihood = 0.0;
  std::array<std::optional<double>, kParamCount> se{};  // empty when unavailable
  std::optional<double> p_dm;  // H0: d_m = 0 vs Ha: d_m > 0
  std::optional<double> p_dv;  // H0: d_v = 0 vs Ha: d_v > 0
  std::optional<Interval> ci_dm;
  std::optional<Interval> ci_dv;
  bool dm_at_boundary = false;
  bool dv_at_boundary = false;
  bool hessian_ok = false;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  double gradient_norm = 0.0;
  std::vector<double> objective_trace;  // log-likelihood per accepted iteration
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kMinFitSample = 200;

FitResult fit(std::span<const double> returns, const FitOptions& options = {});
inline FitResult fit(const ReturnSeries& r, const FitOptions& options = {}) { return fit(r.values, options); }

/// H = d + 1/2.
constexpr double hurst_from_d(double d) { return d + 0.5; }

}  // namespace lrd
