#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "lrd/arfima_figarch.hpp"

using namespace lrd;

namespace {

const ArfimaFigarchParams kTruth{0.0003, 0.1, -0.05, 0.2, 1e-6, 0.2, 0.5, 0.4, 6.0};

// Direct loop transcription of the conditional log-likelihood, used as an oracle.
double naive_loglik(const std::vector<double>& y, const ArfimaFigarchParams& p, std::size_t lag) {
  const std::size_t n = y.size();
  std::vector<double> pi(lag + 1);
  pi[0] = 1.0;
  for (std::size_t k = 1; k <= lag; ++k) pi[k] = pi[k - 1] * (static_cast<double>(k) - 1.0 - p.d_m) / static_cast<double>(k);
  std::vector<double> u(n), eps(n);
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= lag && k <= t; ++k) acc += pi[k] * (y[t - k] - p.mu);
    u[t] = acc;
    eps[t] = u[t] - (t > 0 ? p.phi * u[t - 1] + p.theta * eps[t - 1] : 0.0);
  }
  // lambda_k from the expansion of (1 - alpha L)(1 - L)^d_v / (1 - beta L).
  std::vector<double> dv(lag + 1), c(lag + 1), g(lag + 1), lambda(lag + 1, 0.0);
  dv[0] = 1.0;
  for (std::size_t k = 1; k <= lag; ++k) dv[k] = dv[k - 1] * (static_cast<double>(k) - 1.0 - p.d_v) / static_cast<double>(k);
  for (std::size_t k = 0; k <= lag; ++k) c[k] = dv[k] - (k > 0 ? p.alpha * dv[k - 1] : 0.0);
  for (std::size_t k = 0; k <= lag; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= k; ++j) acc += c[j] * std::pow(p.beta, static_cast<double>(k - j));
    g[k] = acc;
  }
  for (std::size_t k = 1; k <= lag; ++k) lambda[k] = -g[k];
  double mean_sq = 0.0;
  for (double e : eps) mean_sq += e * e;
  mean_sq /= static_cast<double>(n);
  double ll = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double h = p.omega / (1.0 - p.beta);
    for (std::size_t k = 1; k <= lag; ++k) h += lambda[k] * (k <= t ? eps[t - k] * eps[t - k] : mean_sq);
    const double nu = p.nu;
    ll += std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5 * std::log((nu - 2) * std::numbers::pi * h) -
          (nu + 1) / 2 * std::log(1 + eps[t] * eps[t] / ((nu - 2) * h));
  }
  return ll;
}

double sample_variance(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace

TEST_CASE("fractional differencing weights") {
  const auto zero = fracdiff_weights(0.0, 5).weights;
  CHECK(zero == std::vector<double>{1, 0, 0, 0, 0, 0});
  const auto one = fracdiff_weights(1.0, 5).weights;
  CHECK(one == std::vector<double>{1, -1, 0, 0, 0, 0});
  const auto w = fracdiff_weights(0.4, 3).weights;
  CHECK(w[0] == 1.0);
  CHECK(w[1] == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(w[2] == doctest::Approx(-0.12).epsilon(1e-15));
  CHECK(w[3] == doctest::Approx(-0.064).epsilon(1e-15));
  CHECK_THROWS_AS(fracdiff_weights(0.3, 0), InputError);
}

TEST_CASE("fractional differencing: sign pattern and partial sums for 0 < d < 1") {
  for (double d : {0.05, 0.2, 0.45, 0.8}) {
    const auto w = fracdiff_weights(d, 2000).weights;
    double partial = 1.0;
    for (std::size_t k = 1; k < w.size(); ++k) {
      CHECK(w[k] < 0.0);
      CHECK(std::fabs(w[k]) < std::fabs(w[k - 1]) + 1e-300);
      partial += w[k];
      CHECK(partial > 0.0);
    }
  }
}

TEST_CASE("(1 - L)^d (1 - L)^-d is the identity on the truncated kernel") {
  const std::size_t lag = 300;
  const auto a = fracdiff_weights(0.37, lag).weights;
  const auto b = fracdiff_weights(-0.37, lag).weights;
  for (std::size_t k = 0; k <= lag; ++k) {
    double c = 0.0;
    for (std::size_t j = 0; j <= k; ++j) c += a[j] * b[k - j];
    CHECK(c == doctest::Approx(k == 0 ? 1.0 : 0.0).epsilon(1e-12));
  }
}

TEST_CASE("ARCH weights nest GARCH and the constant-variance model") {
  ArfimaFigarchParams p;
  p.alpha = 0.3;
  p.beta = 0.6;
  p.d_v = 0.0;
  auto lambda = arch_weights(p, 50);
  CHECK(lambda[0] == 0.0);
  for (std::size_t k = 1; k <= 50; ++k) {
    CHECK(lambda[k] == doctest::Approx((0.3 - 0.6) * std::pow(0.6, static_cast<double>(k) - 1.0)).epsilon(1e-12));
  }
  p.alpha = 0.0;
  lambda = arch_weights(p, 50);
  for (std::size_t k = 1; k <= 50; ++k) CHECK(lambda[k] == doctest::Approx(-std::pow(0.6, static_cast<double>(k))).epsilon(1e-12));
  p.beta = 0.0;
  lambda = arch_weights(p, 50);
  for (double v : lambda) CHECK(v == 0.0);
}

TEST_CASE("ARCH weights of pure FIGARCH(0, d, 0) are minus the differencing weights") {
  ArfimaFigarchParams p;
  p.d_v = 0.45;
  const auto lambda = arch_weights(p, 200);
  const auto w = fracdiff_weights(0.45, 200).weights;
  for (std::size_t k = 1; k <= 200; ++k) CHECK(lambda[k] == doctest::Approx(-w[k]).epsilon(1e-13));
}

TEST_CASE("parameter validation names the violated constraint") {
  auto message = [](ArfimaFigarchParams p) {
    try {
      validate(p, 100);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  ArfimaFigarchParams ok = kTruth;
  CHECK(message(ok).empty());
  auto p = ok;
  p.phi = 1.0;
  CHECK(message(p).find("phi") != std::string::npos);
  p = ok;
  p.d_m = 0.5;
  CHECK(message(p).find("d_m") != std::string::npos);
  p = ok;
  p.omega = 0.0;
  CHECK(message(p).find("omega") != std::string::npos);
  p = ok;
  p.nu = 2.0;
  CHECK(message(p).find("nu") != std::string::npos);
  p = ok;
  p.d_v = 1.0;
  CHECK(message(p).find("d_v") != std::string::npos);
  p = ok;
  p.alpha = 0.1;
  p.beta = 0.5;
  p.d_v = 0.3;
  CHECK(message(p).find("lambda_1") != std::string::npos);
}

TEST_CASE("simulation with no dynamics is scaled Student-t noise") {
  ArfimaFigarchParams p;
  p.mu = 0.01;
  p.omega = 4.0;
  p.nu = 200.0;
  const auto r = simulate(p, 100000, 1, 42, 1);
  CHECK(r.values.size() == 100000);
  CHECK(r.source_label == "arfima-figarch-simulation");
  double mean = 0.0;
  for (double v : r.values) mean += v;
  mean /= static_cast<double>(r.values.size());
  CHECK(std::fabs(mean - 0.01) < 4.0 * 2.0 / std::sqrt(1e5));
  CHECK(sample_variance(r.values) == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("standardized Student-t innovations have unit variance") {
  ArfimaFigarchParams p;
  p.omega = 1.0;
  p.nu = 6.0;
  const auto r = simulate(p, 1000000, 1, 7, 1);
  CHECK(sample_variance(r.values) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("simulation is deterministic in the seed") {
  const auto a = simulate(kTruth, 500, 200, 9, 200);
  const auto b = simulate(kTruth, 500, 200, 9, 200);
  const auto c = simulate(kTruth, 500, 200, 10, 200);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("simulation preconditions") {
  CHECK_THROWS_AS(simulate(kTruth, 100, 50, 1, 100), InputError);
  CHECK_THROWS_AS(simulate(kTruth, 0, 100, 1, 100), InputError);
  auto bad = kTruth;
  bad.nu = 1.5;
  CHECK_THROWS_AS(simulate(bad, 100, 100, 1, 100), InputError);
}

TEST_CASE("likelihood agrees with a direct transcription") {
  const auto r = simulate(kTruth, 600, 300, 3, 300);
  const std::size_t lag = 120;
  ArfimaFigarchLikelihood lik(r.values, lag);
  for (const auto& p : {kTruth, ArfimaFigarchParams{0.0, -0.3, 0.2, -0.1, 3e-6, 0.1, 0.3, 0.6, 4.5},
                        ArfimaFigarchParams{0.001, 0.0, 0.0, 0.0, 1e-5, 0.0, 0.0, 0.0, 30.0}}) {
    const double oracle = naive_loglik(r.values, p, lag);
    CHECK(lik(p) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("filter: with no mean dynamics the residual is the demeaned return") {
  const auto r = simulate(kTruth, 400, 200, 4, 200);
  ArfimaFigarchParams p;
  p.mu = 0.002;
  p.omega = 1e-5;
  p.alpha = 0.1;
  p.beta = 0.3;
  p.d_v = 0.4;
  ArfimaFigarchLikelihood lik(r.values, 200);
  const auto [eps, h] = lik.filter(p);
  REQUIRE(eps.size() == r.values.size());
  for (std::size_t t = 0; t < eps.size(); ++t) {
    CHECK(eps[t] == doctest::Approx(r.values[t] - 0.002).epsilon(1e-14));
    CHECK(h[t] > 0.0);
  }
}

TEST_CASE("infeasible parameters give -inf and an empty filter") {
  const auto r = simulate(kTruth, 300, 200, 5, 200);
  ArfimaFigarchLikelihood lik(r.values, 200);
  auto p = kTruth;
  p.d_m = 0.6;
  CHECK(lik(p) == -std::numeric_limits<double>::infinity());
  CHECK(lik.filter(p).first.empty());
  p = kTruth;
  p.alpha = 0.1;
  p.d_v = 0.3;
  CHECK(lik(p) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("analytic gradient matches central differences at random interior points") {
  const auto r = simulate(kTruth, 2000, 400, 11, 400);
  ArfimaFigarchLikelihood lik(r.values, 400);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 10) {
    ArfimaFigarchParams p;
    p.mu = 0.001 * (u(rng) - 0.5);
    p.phi = 0.8 * (u(rng) - 0.5);
    p.theta = 0.8 * (u(rng) - 0.5);
    p.d_m = 0.6 * (u(rng) - 0.5);
    p.omega = 1e-6 * (0.2 + 2.0 * u(rng));
    p.alpha = 0.3 * u(rng);
    p.beta = 0.6 * u(rng);
    p.d_v = 0.1 + 0.7 * u(rng);
    p.nu = 3.0 + 10.0 * u(rng);
    ParamVector g{};
    const double ll = lik.value_and_gradient(p, g);
    if (!std::isfinite(ll)) continue;
    ++checked;
    CHECK(ll == doctest::Approx(lik(p)).epsilon(1e-14));
    const auto x = to_vector(p);
    for (std::size_t i = 0; i < kParamCount; ++i) {
      const double step = 1e-5 * std::max(std::fabs(x[i]), i == 0 ? 1e-3 : (i == 4 ? 1e-6 : 1e-2));
      auto hi = x;
      auto lo = x;
      hi[i] += step;
      lo[i] -= step;
      const double numeric = (lik(from_vector(hi)) - lik(from_vector(lo))) / (2.0 * step);
      INFO("parameter " << kParamNames[i] << " analytic " << g[i] << " numeric " << numeric);
      CHECK(std::fabs(g[i] - numeric) <= 1e-4 * std::max(1.0, std::fabs(numeric)));
    }
  }
}

TEST_CASE("fit preconditions") {
  const auto r = simulate(kTruth, 199, 1000, 1);
  CHECK_THROWS_AS(fit(r), InputError);
  CHECK_THROWS_AS(fit(std::vector<double>(500, 0.01)), InputError);
}

TEST_CASE("round trip: one simulated path recovers the memory parameters") {
  const auto r = simulate(kTruth, 8000, 2000, 1);
  const auto res = fit(r);
  MESSAGE("d_m " << res.params.d_m << " d_v " << res.params.d_v << " nu " << res.params.nu << " iterations "
                 << res.iterations << " converged " << res.converged);
  CHECK(res.converged);
  CHECK(res.gradient_norm < FitOptions{}.gradient_tolerance);
  CHECK(res.params.d_m >= 0.15);
  CHECK(res.params.d_m <= 0.25);
  CHECK(res.params.d_v >= 0.3);
  CHECK(res.params.d_v <= 0.5);
  CHECK(res.params.nu >= 4.0);
  CHECK(res.params.nu <= 9.0);
  for (std::size_t i = 1; i < res.objective_trace.size(); ++i) {
    CHECK(res.objective_trace[i] >= res.objective_trace[i - 1]);
  }
  REQUIRE(res.hessian_ok);
  REQUIRE(res.ci_dm.has_value());
  CHECK(res.ci_dm->low < res.params.d_m);
  CHECK(res.params.d_m < res.ci_dm->high);
  CHECK(res.ci_dv->low < res.params.d_v);
  CHECK(res.params.d_v < res.ci_dv->high);
  REQUIRE(res.p_dm.has_value());
  CHECK(*res.p_dm < 0.05);
  CHECK(res.log_likelihood == doctest::Approx(ArfimaFigarchLikelihood(r.values)(res.params)).epsilon(1e-12));
}

TEST_CASE("Hurst exponent from the differencing order") {
  CHECK(hurst_from_d(0.0) == 0.5);
  CHECK(hurst_from_d(0.2) == doctest::Approx(0.7));
  static_assert(hurst_from_d(-0.1) < 0.5);
}
