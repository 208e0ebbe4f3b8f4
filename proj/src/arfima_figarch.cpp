#include "lrd/arfima_figarch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "lrd/optimize.hpp"

namespace lrd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNuFloor = 2.05;
constexpr double kBoundaryTolerance = 1e-4;
// lambda_k this far below zero is rounding, not a constraint violation.
constexpr double kLambdaSlack = 1e-12;

enum Index : std::size_t { kMu, kPhi, kTheta, kDm, kOmega, kAlpha, kBeta, kDv, kNu };

struct Kernel {
  std::vector<double> w;   // pi_k
  std::vector<double> dw;  // d pi_k / d d
};

Kernel kernel_with_derivative(double d, std::size_t lag, bool want_derivative) {
  Kernel k;
  k.w.assign(lag + 1, 0.0);
  k.w[0] = 1.0;
  if (want_derivative) k.dw.assign(lag + 1, 0.0);
  for (std::size_t i = 1; i <= lag; ++i) {
    const double di = static_cast<double>(i);
    k.w[i] = k.w[i - 1] * (di - 1.0 - d) / di;
    if (want_derivative) k.dw[i] = k.dw[i - 1] * (di - 1.0 - d) / di - k.w[i - 1] / di;
  }
  return k;
}

struct ArchWeights {
  std::vector<double> lambda;
  std::vector<double> d_alpha;
  std::vector<double> d_beta;
  std::vector<double> d_dv;
};

// lambda(L) = 1 - g(L), g(L) = (1 - alpha L) pi(L) / (1 - beta L).
ArchWeights arch_weights_impl(double alpha, double beta, double d_v, std::size_t lag, bool want_derivative) {
  const Kernel pi = kernel_with_derivative(d_v, lag, want_derivative);
  ArchWeights out;
  out.lambda.assign(lag + 1, 0.0);
  if (want_derivative) {
    out.d_alpha.assign(lag + 1, 0.0);
    out.d_beta.assign(lag + 1, 0.0);
    out.d_dv.assign(lag + 1, 0.0);
  }
  double g_prev = 1.0;
  double ga_prev = 0.0;
  double gb_prev = 0.0;
  double gd_prev = 0.0;
  for (std::size_t k = 1; k <= lag; ++k) {
    const double g = pi.w[k] - alpha * pi.w[k - 1] + beta * g_prev;
    out.lambda[k] = -g;
    if (want_derivative) {
      const double ga = -pi.w[k - 1] + beta * ga_prev;
      const double gb = g_prev + beta * gb_prev;
      const double gd = pi.dw[k] - alpha * pi.dw[k - 1] + beta * gd_prev;
      out.d_alpha[k] = -ga;
      out.d_beta[k] = -gb;
      out.d_dv[k] = -gd;
      ga_prev = ga;
      gb_prev = gb;
      gd_prev = gd;
    }
    g_prev = g;
  }
  return out;
}

bool in_domain(const ArfimaFigarchParams& p) {
  return std::fabs(p.phi) < 1.0 && std::fabs(p.theta) < 1.0 && std::fabs(p.d_m) < 0.5 && p.omega > 0.0 &&
         std::fabs(p.alpha) < 1.0 && p.beta >= 0.0 && p.beta < 1.0 && p.d_v >= 0.0 && p.d_v < 1.0 &&
         p.nu > 2.0 && std::isfinite(p.mu) && std::isfinite(p.omega) && std::isfinite(p.nu);
}

bool nonnegative(const std::vector<double>& lambda) {
  return std::all_of(lambda.begin(), lambda.end(), [](double l) { return l >= -kLambdaSlack; });
}

}  // namespace

FracDiffKernel fracdiff_weights(double d, std::size_t lag) {
  if (lag < 1) throw InputError("fracdiff truncation lag must be at least 1");
  return {d, kernel_with_derivative(d, lag, false).w};
}

ParamVector to_vector(const ArfimaFigarchParams& p) {
  return {p.mu, p.phi, p.theta, p.d_m, p.omega, p.alpha, p.beta, p.d_v, p.nu};
}

ArfimaFigarchParams from_vector(const ParamVector& v) {
  return {v[kMu], v[kPhi], v[kTheta], v[kDm], v[kOmega], v[kAlpha], v[kBeta], v[kDv], v[kNu]};
}

std::vector<double> arch_weights(const ArfimaFigarchParams& params, std::size_t lag) {
  return arch_weights_impl(params.alpha, params.beta, params.d_v, lag, false).lambda;
}

void validate(const ArfimaFigarchParams& p, std::size_t lag) {
  auto fail = [](const std::string& what) { throw InputError("invalid ARFIMA-FIGARCH parameters: " + what); };
  if (!(std::fabs(p.phi) < 1.0)) fail("|phi| must be < 1");
  if (!(std::fabs(p.theta) < 1.0)) fail("|theta| must be < 1");
  if (!(std::fabs(p.d_m) < 0.5)) fail("d_m must lie in (-0.5, 0.5)");
  if (!(p.omega > 0.0) || !std::isfinite(p.omega)) fail("omega must be > 0");
  if (!(p.beta >= 0.0 && p.beta < 1.0)) fail("beta must lie in [0, 1)");
  if (!(p.d_v >= 0.0 && p.d_v < 1.0)) fail("d_v must lie in [0, 1)");
  if (!(p.nu > 2.0) || !std::isfinite(p.nu)) fail("nu must be > 2");
  if (!std::isfinite(p.mu) || !std::isfinite(p.alpha)) fail("mu and alpha must be finite");
  const auto lambda = arch_weights(p, lag);
  for (std::size_t k = 1; k < lambda.size(); ++k) {
    if (lambda[k] < -kLambdaSlack) {
      std::ostringstream msg;
      msg << "ARCH weight lambda_" << k << " = " << lambda[k] << " is negative";
      fail(msg.str());
    }
  }
}

ReturnSeries simulate(const ArfimaFigarchParams& p, std::size_t n, std::size_t burn_in, std::uint64_t seed,
                      std::size_t lag, Frequency frequency) {
  validate(p, lag);
  if (n < 1) throw InputError("simulate: n must be at least 1");
  if (burn_in < lag) {
    throw InputError("simulate: burn-in (" + std::to_string(burn_in) + ") must be at least the truncation lag (" +
                     std::to_string(lag) + ")");
  }
  const std::size_t total = n + burn_in;
  const auto lambda = arch_weights(p, lag);
  const double intercept = p.omega / (1.0 - p.beta);

  std::mt19937_64 rng(seed);
  std::student_t_distribution<double> student(p.nu);
  const double standardize = std::sqrt((p.nu - 2.0) / p.nu);

  std::vector<double> eps(total);
  std::vector<double> eps_sq(total);
  for (std::size_t t = 0; t < total; ++t) {
    double h = intercept;
    const std::size_t reach = std::min(t, lag);
    for (std::size_t k = 1; k <= reach; ++k) h += lambda[k] * eps_sq[t - k];
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw NumericalError("simulate: non-finite conditional variance at t = " + std::to_string(t));
    }
    eps[t] = std::sqrt(h) * standardize * student(rng);
    eps_sq[t] = eps[t] * eps[t];
  }

  // ARMA(1, 1) part, then the inverse fractional filter (1 - L)^{-d_m}.
  std::vector<double> arma(total);
  double prev_arma = 0.0;
  double prev_eps = 0.0;
  for (std::size_t t = 0; t < total; ++t) {
    arma[t] = p.phi * prev_arma + eps[t] + p.theta * prev_eps;
    prev_arma = arma[t];
    prev_eps = eps[t];
  }
  const auto psi = fracdiff_weights(-p.d_m, lag).weights;
  std::vector<double> y(total, 0.0);
  for (std::size_t k = 0; k <= lag && k < total; ++k) {
    const double w = psi[k];
    for (std::size_t t = k; t < total; ++t) y[t] += w * arma[t - k];
  }

  ReturnSeries out;
  out.frequency = frequency;
  out.source_label = "arfima-figarch-simulation";
  out.values.reserve(n);
  for (std::size_t t = burn_in; t < total; ++t) {
    const double value = p.mu + y[t];
    if (!std::isfinite(value)) throw NumericalError("simulate: non-finite return at t = " + std::to_string(t));
    out.values.push_back(value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Likelihood

ArfimaFigarchLikelihood::ArfimaFigarchLikelihood(std::span<const double> returns, std::size_t lag)
    : returns_(returns.begin(), returns.end()), lag_(lag) {
  if (lag_ < 1) throw InputError("truncation lag must be at least 1");
  if (returns_.empty()) throw InputError("likelihood of an empty sample");
}

double ArfimaFigarchLikelihood::operator()(const ArfimaFigarchParams& params) const {
  return evaluate(params, nullptr);
}

double ArfimaFigarchLikelihood::value_and_gradient(const ArfimaFigarchParams& params, ParamVector& gradient) const {
  return evaluate(params, &gradient);
}

std::pair<std::vector<double>, std::vector<double>> ArfimaFigarchLikelihood::filter(
    const ArfimaFigarchParams& p) const {
  if (!in_domain(p)) return {};
  const std::size_t n = returns_.size();
  const auto pi = kernel_with_derivative(p.d_m, lag_, false).w;
  std::vector<double> u(n, 0.0);
  for (std::size_t k = 0; k <= lag_ && k < n; ++k) {
    const double w = pi[k];
    for (std::size_t t = k; t < n; ++t) u[t] += w * (returns_[t - k] - p.mu);
  }
  std::vector<double> eps(n);
  double prev_u = 0.0;
  double prev_eps = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    eps[t] = u[t] - p.phi * prev_u - p.theta * prev_eps;
    prev_u = u[t];
    prev_eps = eps[t];
  }
  const auto lambda = arch_weights(p, lag_);
  if (!nonnegative(lambda)) return {};
  double mean_sq = 0.0;
  for (double e : eps) mean_sq += e * e;
  mean_sq /= static_cast<double>(n);
  std::vector<double> h(n, p.omega / (1.0 - p.beta));
  std::vector<double> suffix(lag_ + 2, 0.0);
  for (std::size_t k = lag_; k >= 1; --k) suffix[k] = suffix[k + 1] + lambda[k];
  for (std::size_t t = 0; t < n && t < lag_; ++t) h[t] += mean_sq * suffix[t + 1];
  for (std::size_t k = 1; k <= lag_ && k < n; ++k) {
    const double w = lambda[k];
    for (std::size_t t = k; t < n; ++t) h[t] += w * eps[t - k] * eps[t - k];
  }
  return {std::move(eps), std::move(h)};
}

double ArfimaFigarchLikelihood::evaluate(const ArfimaFigarchParams& p, ParamVector* gradient) const {
  if (!in_domain(p)) return -kInf;
  const bool want_grad = gradient != nullptr;
  const std::size_t n = returns_.size();
  const std::size_t lag = lag_;
  const std::size_t reach = std::min(lag, n - 1);

  // Mean filter: u = (1 - L)^d_m (y - mu), v = (1 - phi L) u, eps = v / (1 + theta L).
  const Kernel pi = kernel_with_derivative(p.d_m, lag, want_grad);
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = returns_[t] - p.mu;
  std::vector<double> u(n, 0.0);
  for (std::size_t k = 0; k <= reach; ++k) {
    const double w = pi.w[k];
    double* __restrict ut = u.data() + k;
    const double* __restrict xt = x.data();
    for (std::size_t t = 0; t < n - k; ++t) ut[t] += w * xt[t];
  }
  std::vector<double> eps(n);
  {
    double prev_u = 0.0;
    double prev_eps = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      eps[t] = u[t] - p.phi * prev_u - p.theta * prev_eps;
      prev_u = u[t];
      prev_eps = eps[t];
    }
  }

  // Variance filter.
  const ArchWeights arch = arch_weights_impl(p.alpha, p.beta, p.d_v, lag, want_grad);
  if (!nonnegative(arch.lambda)) return -kInf;
  std::vector<double> e(n);
  double mean_sq = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    e[t] = eps[t] * eps[t];
    mean_sq += e[t];
  }
  mean_sq /= static_cast<double>(n);

  std::vector<double> suffix(lag + 2, 0.0);  // suffix[k] = sum_{j >= k} lambda_j
  for (std::size_t k = lag; k >= 1; --k) suffix[k] = suffix[k + 1] + arch.lambda[k];

  const double intercept = p.omega / (1.0 - p.beta);
  std::vector<double> h(n, intercept);
  for (std::size_t t = 0; t < n && t < lag; ++t) h[t] += mean_sq * suffix[t + 1];
  for (std::size_t k = 1; k <= reach; ++k) {
    const double w = arch.lambda[k];
    double* __restrict ht = h.data() + k;
    const double* __restrict et = e.data();
    for (std::size_t t = 0; t < n - k; ++t) ht[t] += w * et[t];
  }

  const double nu = p.nu;
  const double log_const = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                           0.5 * std::log((nu - 2.0) * std::numbers::pi);
  // Extended accumulator: the line search resolves differences far below the
  // double ulp of the total.
  long double sum = 0.0L;
  for (std::size_t t = 0; t < n; ++t) {
    if (!(h[t] > 0.0) || !std::isfinite(h[t])) return -kInf;
    const double q = e[t] / ((nu - 2.0) * h[t]);
    sum += -0.5 * std::log(h[t]) - 0.5 * (nu + 1.0) * std::log1p(q);
  }
  const double ll = static_cast<double>(sum + static_cast<long double>(n) * log_const);
  if (!std::isfinite(ll)) return -kInf;
  if (!want_grad) return ll;

  // ---- reverse accumulation ----
  ParamVector& g = *gradient;
  g.fill(0.0);

  std::vector<double> gh(n);
  std::vector<double> geps(n);
  const double half_psi = 0.5 * boost::math::digamma(0.5 * (nu + 1.0)) - 0.5 * boost::math::digamma(0.5 * nu);
  double g_nu = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double denom = (nu - 2.0) * h[t] + e[t];
    gh[t] = -0.5 / h[t] + 0.5 * (nu + 1.0) * e[t] / (h[t] * denom);
    geps[t] = -(nu + 1.0) * eps[t] / denom;
    const double q = e[t] / ((nu - 2.0) * h[t]);
    g_nu += half_psi - 0.5 / (nu - 2.0) - 0.5 * std::log1p(q) + 0.5 * (nu + 1.0) * q / ((nu - 2.0) * (1.0 + q));
  }
  g[kNu] = g_nu;

  double g_intercept = 0.0;
  for (double v : gh) g_intercept += v;
  g[kOmega] = g_intercept / (1.0 - p.beta);
  double g_beta = g_intercept * p.omega / ((1.0 - p.beta) * (1.0 - p.beta));

  // d LL / d lambda_k = sum_t gh_t E_{t-k}, with E = mean_sq before the sample.
  std::vector<double> prefix_gh(n + 1, 0.0);
  for (std::size_t t = 0; t < n; ++t) prefix_gh[t + 1] = prefix_gh[t] + gh[t];
  double g_alpha = 0.0;
  double g_dv = 0.0;
  for (std::size_t k = 1; k <= lag; ++k) {
    double acc = mean_sq * prefix_gh[std::min(k, n)];
    if (k < n) {
      const double* __restrict ght = gh.data() + k;
      const double* __restrict et = e.data();
      for (std::size_t t = 0; t < n - k; ++t) acc += ght[t] * et[t];
    }
    g_alpha += acc * arch.d_alpha[k];
    g_beta += acc * arch.d_beta[k];
    g_dv += acc * arch.d_dv[k];
  }
  g[kAlpha] = g_alpha;
  g[kBeta] = g_beta;
  g[kDv] = g_dv;

  // d LL / d e_s through the in-sample terms and through mean_sq.
  double g_mean_sq = 0.0;
  for (std::size_t t = 0; t < n && t < lag; ++t) g_mean_sq += gh[t] * suffix[t + 1];
  std::vector<double> ge(n, g_mean_sq / static_cast<double>(n));
  for (std::size_t k = 1; k <= reach; ++k) {
    const double w = arch.lambda[k];
    double* __restrict gs = ge.data();
    const double* __restrict ght = gh.data() + k;
    for (std::size_t s = 0; s < n - k; ++s) gs[s] += w * ght[s];
  }
  for (std::size_t t = 0; t < n; ++t) geps[t] += 2.0 * eps[t] * ge[t];

  // eps_t = v_t - theta eps_{t-1}: adjoint runs backwards.
  std::vector<double> gv(n);
  double g_theta = 0.0;
  {
    double carry = 0.0;
    for (std::size_t i = n; i-- > 0;) {
      const double a = geps[i] - p.theta * carry;
      gv[i] = a;
      if (i > 0) g_theta -= a * eps[i - 1];
      carry = a;
    }
  }
  g[kTheta] = g_theta;

  // v_t = u_t - phi u_{t-1}.
  std::vector<double> gu(n);
  double g_phi = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    gu[t] = gv[t] - (t + 1 < n ? p.phi * gv[t + 1] : 0.0);
    if (t > 0) g_phi -= gv[t] * u[t - 1];
  }
  g[kPhi] = g_phi;

  // u_t = sum_k pi_k x_{t-k}.
  double g_mu = 0.0;
  {
    double partial = 0.0;  // sum_{k <= min(t, lag)} pi_k
    for (std::size_t t = 0; t < n; ++t) {
      if (t <= lag) partial += pi.w[t];
      g_mu -= gu[t] * partial;
    }
  }
  g[kMu] = g_mu;
  double g_dm = 0.0;
  for (std::size_t k = 1; k <= reach; ++k) {
    double acc = 0.0;
    const double* __restrict gut = gu.data() + k;
    const double* __restrict xt = x.data();
    for (std::size_t t = 0; t < n - k; ++t) acc += gut[t] * xt[t];
    g_dm += acc * pi.dw[k];
  }
  g[kDm] = g_dm;
  return ll;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// Unconstrained coordinates: tanh for (-1, 1), scaled logistic for bounded
// intervals, log for positive parameters, an affine map for mu.
class Reparam {
 public:
  Reparam(double mean, double scale) : mean_(mean), scale_(scale) {}

  double to_natural(std::size_t i, double z) const {
    switch (i) {
      case kMu: return mean_ + scale_ * z;
      case kPhi:
      case kTheta:
      case kAlpha: return std::tanh(z);
      case kDm: return 0.5 * logistic(z);
      case kOmega: return std::exp(z);
      case kBeta:
      case kDv: return logistic(z);
      case kNu: return kNuFloor + std::exp(z);
      default: return z;
    }
  }

  double derivative(std::size_t i, double z) const {
    switch (i) {
      case kMu: return scale_;
      case kPhi:
      case kTheta:
      case kAlpha: {
        const double t = std::tanh(z);
        return 1.0 - t * t;
      }
      case kDm: {
        const double s = logistic(z);
        return 0.5 * s * (1.0 - s);
      }
      case kOmega:
      case kNu: return std::exp(z);
      case kBeta:
      case kDv: {
        const double s = logistic(z);
        return s * (1.0 - s);
      }
      default: return 1.0;
    }
  }

  double to_free(std::size_t i, double x) const {
    constexpr double eps = 1e-6;
    switch (i) {
      case kMu: return (x - mean_) / scale_;
      case kPhi:
      case kTheta:
      case kAlpha: return std::atanh(std::clamp(x, -1.0 + eps, 1.0 - eps));
      case kDm: return logit(std::clamp(2.0 * x, eps, 1.0 - eps));
      case kOmega: return std::log(x);
      case kBeta:
      case kDv: return logit(std::clamp(x, eps, 1.0 - eps));
      case kNu: return std::log(std::max(x - kNuFloor, eps));
      default: return x;
    }
  }

 private:
  double mean_;
  double scale_;
};

struct Problem {
  const ArfimaFigarchLikelihood& likelihood;
  const Reparam& reparam;
  std::array<bool, kParamCount> pinned{};
  ParamVector pinned_value{};

  std::vector<std::size_t> free_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < kParamCount; ++i) {
      if (!pinned[i]) idx.push_back(i);
    }
    return idx;
  }

  ParamVector natural(std::span<const double> z) const {
    ParamVector x = pinned_value;
    std::size_t j = 0;
    for (std::size_t i = 0; i < kParamCount; ++i) {
      if (!pinned[i]) x[i] = reparam.to_natural(i, z[j++]);
    }
    return x;
  }

  std::vector<double> free_coords(const ParamVector& x) const {
    std::vector<double> z;
    for (std::size_t i = 0; i < kParamCount; ++i) {
      if (!pinned[i]) z.push_back(reparam.to_free(i, x[i]));
    }
    return z;
  }

  double nll(std::span<const double> z) const {
    const double ll = likelihood(from_vector(natural(z)));
    return std::isfinite(ll) ? -ll : kInf;
  }

  double nll_with_gradient(std::span<const double> z, std::span<double> grad) const {
    ParamVector g{};
    const double ll = likelihood.value_and_gradient(from_vector(natural(z)), g);
    if (!std::isfinite(ll)) return kInf;
    std::size_t j = 0;
    for (std::size_t i = 0; i < kParamCount; ++i) {
      if (!pinned[i]) {
        grad[j] = -g[i] * reparam.derivative(i, z[j]);
        ++j;
      }
    }
    return -ll;
  }
};

ArfimaFigarchParams default_init(std::span<const double> returns) {
  const double n = static_cast<double>(returns.size());
  double mean = 0.0;
  for (double v : returns) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : returns) var += (v - mean) * (v - mean);
  var /= n;
  ArfimaFigarchParams init;
  init.mu = mean;
  init.phi = 0.0;
  init.theta = 0.0;
  init.d_m = 0.1;
  init.omega = 0.1 * var;
  init.alpha = 0.1;
  init.beta = 0.5;
  init.d_v = 0.3;
  init.nu = 8.0;
  return init;
}

bool lambda_feasible(const ArfimaFigarchParams& p, std::size_t lag) {
  return nonnegative(arch_weights(p, lag));
}

}  // namespace

FitResult fit(std::span<const double> returns, const FitOptions& options) {
  if (returns.size() < kMinFitSample) {
    throw InputError("ARFIMA-FIGARCH fit needs at least " + std::to_string(kMinFitSample) + " returns, got " +
                     std::to_string(returns.size()));
  }
  FitResult result;
  const ArfimaFigarchLikelihood likelihood(returns, options.truncation_lag);

  double mean = 0.0;
  for (double v : returns) mean += v;
  mean /= static_cast<double>(returns.size());
  double var = 0.0;
  for (double v : returns) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(returns.size()));
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  if (*lo == *hi || !(sd > 0.0)) throw InputError("ARFIMA-FIGARCH fit: zero-variance sample");
  const Reparam reparam(mean, sd);

  ArfimaFigarchParams start = options.init.value_or(default_init(returns));
  // The search keeps d_m, d_v >= 0; start strictly inside.
  start.d_m = std::clamp(start.d_m, 1e-3, 0.49);
  start.d_v = std::clamp(start.d_v, 1e-3, 0.99);
  start.nu = std::max(start.nu, kNuFloor + 0.1);
  while (!lambda_feasible(start, options.truncation_lag) && start.beta > 1e-3) start.beta *= 0.5;
  if (!lambda_feasible(start, options.truncation_lag) || !std::isfinite(likelihood(start))) {
    throw InputError("ARFIMA-FIGARCH fit: initial parameters are infeasible");
  }
  if (options.init && start.beta != options.init->beta) {
    result.warnings.push_back("initial beta reduced to satisfy lambda_k >= 0");
  }

  Problem problem{likelihood, reparam};
  std::size_t budget = options.max_iterations;

  // Stage 1: simplex refinement.
  std::vector<double> z = problem.free_coords(to_vector(start));
  {
    optim::NelderMeadOptions nm;
    nm.max_iterations = std::min(options.simplex_iterations, budget);
    nm.initial_step = 0.3;
    const auto res = optim::nelder_mead([&](std::span<const double> v) { return problem.nll(v); }, z, nm);
    z = res.x;
    budget -= res.iterations;
    result.iterations += res.iterations;
    result.evaluations += res.evaluations;
    for (double v : res.trace) result.objective_trace.push_back(-v);
  }

  // Stage 2: quasi-Newton polish with an active set for d_m = 0 and d_v = 0.
  constexpr std::array<std::size_t, 2> kFloored = {kDm, kDv};
  ParamVector x = problem.natural(z);
  double best_nll = problem.nll(z);
  for (int round = 0; round < 6; ++round) {
    optim::BfgsOptions bo;
    bo.max_iterations = budget;
    bo.gradient_tolerance = options.gradient_tolerance;
    bo.stop = [&](std::span<const double> v, std::span<const double> grad) {
      // A floored parameter sinking into its bound; the free gradient has the
      // same sign as the natural one.
      const ParamVector nat = problem.natural(v);
      std::size_t j = 0;
      for (std::size_t i = 0; i < kParamCount; ++i) {
        if (problem.pinned[i]) continue;
        if ((i == kDm || i == kDv) && nat[i] < kBoundaryTolerance && grad[j] > 0.0) return true;
        ++j;
      }
      return false;
    };
    const auto res = optim::bfgs(
        [&](std::span<const double> v, std::span<double> grad) { return problem.nll_with_gradient(v, grad); }, z,
        bo);
    budget -= std::min(budget, res.iterations);
    result.iterations += res.iterations;
    result.evaluations += res.evaluations;
    for (double v : res.trace) result.objective_trace.push_back(-v);
    z = res.x;
    best_nll = res.value;
    x = problem.natural(z);
    result.converged = res.converged;
    result.gradient_norm = res.gradient_norm;

    ParamVector natural_grad{};
    likelihood.value_and_gradient(from_vector(x), natural_grad);
    bool changed = false;
    for (std::size_t i : kFloored) {
      if (!problem.pinned[i] && x[i] < kBoundaryTolerance && natural_grad[i] < 0.0) {
        // LL still rising towards the bound: project onto it if that does not lose likelihood.
        ParamVector trial = x;
        trial[i] = 0.0;
        const double ll = likelihood(from_vector(trial));
        if (std::isfinite(ll) && -ll <= best_nll) {
          problem.pinned[i] = true;
          problem.pinned_value[i] = 0.0;
          x = trial;
          best_nll = -ll;
          result.objective_trace.push_back(ll);
          changed = true;
        }
      } else if (problem.pinned[i] && natural_grad[i] > 0.0) {
        // LL increases away from the bound: release it.
        for (double step : {1e-3, 1e-4, 1e-5}) {
          ParamVector trial = x;
          trial[i] = step;
          const double ll = likelihood(from_vector(trial));
          if (std::isfinite(ll) && -ll <= best_nll) {
            problem.pinned[i] = false;
            x = trial;
            best_nll = -ll;
            result.objective_trace.push_back(ll);
            changed = true;
            break;
          }
        }
      }
    }
    if (!changed) break;
    z = problem.free_coords(x);
    if (budget == 0) {
      result.converged = false;
      break;
    }
  }

  result.params = from_vector(x);
  result.log_likelihood = -best_nll;
  result.dm_at_boundary = problem.pinned[kDm];
  result.dv_at_boundary = problem.pinned[kDv];
  if (!result.converged) {
    result.warnings.push_back("optimizer did not reach the gradient tolerance within the iteration budget");
  }

  // Standard errors from a central-difference Hessian of the analytic gradient
  // in natural coordinates, equilibrated before inversion.
  ParamVector scale{};
  for (std::size_t i = 0; i < kParamCount; ++i) scale[i] = 1.0;
  scale[kMu] = sd;
  scale[kOmega] = x[kOmega];
  scale[kNu] = x[kNu];
  Eigen::Matrix<double, kParamCount, kParamCount> hess;
  bool hessian_finite = true;
  for (std::size_t i = 0; i < kParamCount && hessian_finite; ++i) {
    const double step = 1e-5 * scale[i];
    ParamVector plus = x;
    ParamVector minus = x;
    plus[i] += step;
    minus[i] -= step;
    ParamVector g_plus{};
    ParamVector g_minus{};
    ParamVector g_center{};
    const bool ok_plus = std::isfinite(likelihood.value_and_gradient(from_vector(plus), g_plus));
    const bool ok_minus = std::isfinite(likelihood.value_and_gradient(from_vector(minus), g_minus));
    for (std::size_t j = 0; j < kParamCount; ++j) {
      double d2;
      if (ok_plus && ok_minus) {
        d2 = (g_plus[j] - g_minus[j]) / (2.0 * step);
      } else if (ok_plus || ok_minus) {
        likelihood.value_and_gradient(from_vector(x), g_center);
        d2 = ok_plus ? (g_plus[j] - g_center[j]) / step : (g_center[j] - g_minus[j]) / step;
      } else {
        hessian_finite = false;
        break;
      }
      hess(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = -d2;  // Hessian of the NLL
    }
  }
  if (hessian_finite) {
    hess = 0.5 * (hess + hess.transpose()).eval();
    Eigen::Matrix<double, kParamCount, 1> equil;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(kParamCount); ++i) {
      const double diag = hess(i, i);
      equil(i) = diag > 0.0 ? 1.0 / std::sqrt(diag) : 0.0;
    }
    if ((equil.array() > 0.0).all() && hess.allFinite()) {
      const Eigen::Matrix<double, kParamCount, kParamCount> scaled = equil.asDiagonal() * hess * equil.asDiagonal();
      const Eigen::LLT<Eigen::Matrix<double, kParamCount, kParamCount>> llt(scaled);
      if (llt.info() == Eigen::Success) {
        const Eigen::Matrix<double, kParamCount, kParamCount> cov =
            equil.asDiagonal() * llt.solve(Eigen::Matrix<double, kParamCount, kParamCount>::Identity()) *
            equil.asDiagonal();
        result.hessian_ok = true;
        for (std::size_t i = 0; i < kParamCount; ++i) {
          const double v = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
          if (v > 0.0 && std::isfinite(v)) result.se[i] = std::sqrt(v);
        }
      }
    }
  }
  if (!result.hessian_ok) {
    result.warnings.push_back("Hessian is not positive definite; standard errors unavailable");
  }

  const boost::math::normal standard;
  const double z975 = boost::math::quantile(standard, 0.975);
  auto infer = [&](std::size_t i, bool at_boundary, std::optional<double>& p_value, std::optional<Interval>& ci) {
    if (!result.se[i]) return;
    const double est = x[i];
    const double se = *result.se[i];
    ci = Interval{est - z975 * se, est + z975 * se};
    p_value = at_boundary ? 0.5 : boost::math::cdf(boost::math::complement(standard, est / se));
  };
  infer(kDm, result.dm_at_boundary, result.p_dm, result.ci_dm);
  infer(kDv, result.dv_at_boundary, result.p_dv, result.ci_dv);
  return result;
}

}  // namespace lrd
