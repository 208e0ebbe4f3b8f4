#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "lrd/hurst_dfa.hpp"

using namespace lrd;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = z(rng);
  return x;
}

// ARFIMA(0, d, 0): Gaussian noise through the MA(inf) weights of (1 - L)^-d.
std::vector<double> arfima0d0(std::size_t n, double d, std::uint64_t seed) {
  const std::size_t lag = 2000;
  const auto noise = gaussian(n + lag, seed);
  std::vector<double> psi(lag + 1);
  psi[0] = 1.0;
  for (std::size_t k = 1; k <= lag; ++k) psi[k] = psi[k - 1] * (static_cast<double>(k) - 1.0 + d) / static_cast<double>(k);
  std::vector<double> x(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k <= lag; ++k) x[t] += psi[k] * noise[t + lag - k];
  }
  return x;
}

// Least squares through Eigen's QR as an independent detrending oracle.
double qr_fluctuation(const std::vector<double>& seg) {
  const auto n = static_cast<Eigen::Index>(seg.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = static_cast<double>(i + 1);
    y(i) = seg[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y);
  return std::sqrt((y - a * coef).squaredNorm() / static_cast<double>(n));
}

}  // namespace

TEST_CASE("profile") {
  const auto y = profile(std::vector<double>{1, -1, 1, -1});
  CHECK(y == std::vector<double>{1, 0, 1, 0});
  for (double v : profile(std::vector<double>(10, 2.5))) CHECK(v == 0.0);
  const auto r = profile(gaussian(999, 3));
  CHECK(std::fabs(r.back()) < 1e-10);
}

TEST_CASE("block fluctuation: hand examples") {
  CHECK(block_fluctuation(std::vector<double>{2, 4, 6, 8}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(block_fluctuation(std::vector<double>{0, 1, 0, 1}) == doctest::Approx(std::sqrt(0.2)).epsilon(1e-14));
  CHECK_THROWS_AS(block_fluctuation(std::vector<double>{1, 2, 3}), InputError);
}

TEST_CASE("block fluctuation agrees with a QR least-squares oracle") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(4, 300);
  for (int trial = 0; trial < 50; ++trial) {
    const auto seg = gaussian(static_cast<std::size_t>(len(rng)), 100 + trial);
    CHECK(block_fluctuation(seg) == doctest::Approx(qr_fluctuation(seg)).epsilon(1e-9));
  }
}

TEST_CASE("random segment: residuals orthogonal to (1, i)") {
  const auto seg = gaussian(37, 5);
  const double n = 37.0;
  const double mean_i = (n + 1.0) / 2.0;
  double mean_y = 0.0;
  for (double v : seg) mean_y += v;
  mean_y /= n;
  double sxy = 0.0;
  for (std::size_t i = 0; i < seg.size(); ++i) sxy += (static_cast<double>(i + 1) - mean_i) * (seg[i] - mean_y);
  const double slope = sxy / (n * (n * n - 1.0) / 12.0);
  const double intercept = mean_y - slope * mean_i;
  double r0 = 0.0;
  double r1 = 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    const double r = seg[i] - intercept - slope * static_cast<double>(i + 1);
    r0 += r;
    r1 += r * static_cast<double>(i + 1);
    ss += r * r;
  }
  CHECK(std::fabs(r0) < 1e-9);
  CHECK(std::fabs(r1) < 1e-9);
  CHECK(block_fluctuation(seg) == doctest::Approx(std::sqrt(ss / n)).epsilon(1e-12));
}

TEST_CASE("dfa_analysis uses scales >= 4 and the mean of block fluctuations") {
  const auto x = gaussian(1000, 8);
  const auto a = dfa_analysis(x);
  const auto y = profile(x);
  for (const auto& s : a.scales) {
    CHECK(s.scale >= 4);
    const std::size_t blocks = y.size() / s.scale;
    double mean_f = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::vector<double> seg(y.begin() + static_cast<long>(b * s.scale), y.begin() + static_cast<long>((b + 1) * s.scale));
      mean_f += qr_fluctuation(seg);
    }
    mean_f /= static_cast<double>(blocks);
    CHECK(s.statistic == doctest::Approx(mean_f).epsilon(1e-9));
  }
  CHECK(a.estimate.method == HurstMethod::DFA);
}

TEST_CASE("short series") {
  CHECK_THROWS_WITH_AS(dfa_analysis(gaussian(15, 1)), doctest::Contains("series too short"), InputError);
}

TEST_CASE("affine invariance") {
  const auto x = gaussian(4096, 31);
  const auto base = dfa_analysis(x);
  auto y = x;
  for (auto& v : y) v = 2.75 * v - 1.5;
  const auto moved = dfa_analysis(y);
  CHECK(moved.estimate.h == doctest::Approx(base.estimate.h).epsilon(1e-9));
  CHECK(moved.estimate.p_value == doctest::Approx(base.estimate.p_value).epsilon(1e-9));
  for (std::size_t i = 0; i < base.fit.points.size(); ++i) {
    CHECK(moved.fit.points[i].ln_stat - base.fit.points[i].ln_stat == doctest::Approx(std::log(2.75)).epsilon(1e-9));
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 8.0 * x[i];
  CHECK(dfa_analysis(y).estimate.h == base.estimate.h);
}

TEST_CASE("iid calibration and ARFIMA(0, 0.2, 0) discrimination over 50 seeds") {
  std::vector<double> iid;
  std::vector<double> lrd;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    iid.push_back(dfa_analysis(gaussian(8192, seed)).estimate.h);
    lrd.push_back(dfa_analysis(arfima0d0(8192, 0.2, 1000 + seed)).estimate.h);
  }
  auto mean_sd = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::pair{m, std::sqrt(s / static_cast<double>(v.size() - 1))};
  };
  const auto [m_iid, sd_iid] = mean_sd(iid);
  const auto [m_lrd, sd_lrd] = mean_sd(lrd);
  MESSAGE("DFA iid mean H = " << m_iid << ", ARFIMA(0,0.2,0) mean H = " << m_lrd);
  CHECK(m_iid >= 0.45);
  CHECK(m_iid <= 0.55);
  CHECK(m_lrd >= 0.65);
  CHECK(m_lrd <= 0.75);
  const double se = std::sqrt((sd_iid * sd_iid + sd_lrd * sd_lrd) / 50.0);
  CHECK((m_lrd - m_iid) / se >= 5.0);
}
