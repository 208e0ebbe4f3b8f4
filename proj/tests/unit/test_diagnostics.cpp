#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lrd/diagnostics.hpp"

using namespace lrd;

namespace {

std::vector<double> dataset_a() {
  std::vector<double> x;
  for (int i = 0; i < 100; ++i) x.push_back(((i * 37) % 29) * ((i * 37) % 29) / 100.0);
  return x;
}

std::vector<double> dataset_b() {
  std::vector<double> x;
  for (int i = 0; i < 25; ++i) x.push_back(((i * i * 7 + 3 * i) % 23 - 11) / 4.0);
  return x;
}

}  // namespace

// Reference values: scipy.stats skew, kurtosis, skewtest, kurtosistest, normaltest.
TEST_CASE("moments and normality tests match the scipy reference (n = 100)") {
  const auto m = moments(dataset_a());
  CHECK(m.n == 100);
  CHECK(m.mean == doctest::Approx(2.6055999999999999).epsilon(1e-13));
  CHECK(m.stddev == doctest::Approx(2.4164901489557122).epsilon(1e-12));
  CHECK(m.skewness == doctest::Approx(0.68291084018951087).epsilon(1e-11));
  CHECK(m.excess_kurtosis == doctest::Approx(-0.81147180325134682).epsilon(1e-11));
  CHECK(m.z_skew == doctest::Approx(2.7410216834299153).epsilon(1e-10));
  CHECK(m.p_skew == doctest::Approx(0.0061248465370440982).epsilon(1e-9));
  CHECK(m.z_kurt == doctest::Approx(-2.4786727763553009).epsilon(1e-10));
  CHECK(m.p_kurt == doctest::Approx(0.01318722253571966).epsilon(1e-9));
  CHECK(m.k2 == doctest::Approx(13.657018601277862).epsilon(1e-10));
  CHECK(m.p_omnibus == doctest::Approx(0.0010824705536387254).epsilon(1e-9));
}

TEST_CASE("moments and normality tests match the scipy reference (n = 25)") {
  const auto m = moments(dataset_b());
  CHECK(m.mean == doctest::Approx(-0.35).epsilon(1e-13));
  CHECK(m.stddev == doctest::Approx(1.6294170736800326).epsilon(1e-12));
  CHECK(m.skewness == doctest::Approx(0.3788051864609861).epsilon(1e-11));
  CHECK(m.excess_kurtosis == doctest::Approx(-0.7716545905284784).epsilon(1e-11));
  CHECK(m.z_skew == doctest::Approx(0.90976153821193728).epsilon(1e-10));
  CHECK(m.p_skew == doctest::Approx(0.3629482824722865).epsilon(1e-9));
  CHECK(m.z_kurt == doctest::Approx(-0.76276217339853858).epsilon(1e-10));
  CHECK(m.p_kurt == doctest::Approx(0.44560524395265588).epsilon(1e-9));
  CHECK(m.k2 == doctest::Approx(1.4094721895774125).epsilon(1e-10));
  CHECK(m.p_omnibus == doctest::Approx(0.49423898929167975).epsilon(1e-9));
}

TEST_CASE("moment preconditions") {
  std::vector<double> short_sample(19, 1.0);
  short_sample[0] = 2.0;
  CHECK_THROWS_AS(moments(short_sample), InputError);
  CHECK_THROWS_AS(moments(std::vector<double>(50, 3.0)), InputError);
}

TEST_CASE("skewness and kurtosis are affine invariant up to the sign of the scale") {
  std::mt19937_64 rng(11);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(2000);
  for (auto& v : x) v = e(rng);
  const auto base = moments(x);
  std::vector<double> y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return 3.5 * v - 7.0; });
  const auto scaled = moments(y);
  CHECK(scaled.skewness == doctest::Approx(base.skewness).epsilon(1e-10));
  CHECK(scaled.excess_kurtosis == doctest::Approx(base.excess_kurtosis).epsilon(1e-10));
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return -v; });
  const auto flipped = moments(y);
  CHECK(flipped.skewness == doctest::Approx(-base.skewness).epsilon(1e-10));
  CHECK(flipped.p_skew == doctest::Approx(base.p_skew).epsilon(1e-9));
}

TEST_CASE("heavy tails are detected") {
  std::mt19937_64 rng(5);
  std::student_t_distribution<double> t(3.0);
  std::vector<double> x(5000);
  for (auto& v : x) v = t(rng);
  const auto m = moments(x);
  CHECK(m.excess_kurtosis > 1.0);
  CHECK(m.p_kurt < 0.001);
}

TEST_CASE("histogram counts and densities") {
  const auto x = dataset_a();
  const auto bins = histogram(x, 10);
  REQUIRE(bins.size() == 10);
  std::size_t total = 0;
  double area = 0.0;
  for (const auto& b : bins) {
    total += b.count;
    area += b.density * (b.upper - b.lower);
    CHECK(b.normal_density > 0.0);
  }
  CHECK(total == x.size());
  CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bins.front().lower == *std::min_element(x.begin(), x.end()));
  CHECK(bins.back().upper == *std::max_element(x.begin(), x.end()));
  CHECK_THROWS_AS(histogram(x, 0), InputError);
}

TEST_CASE("normal QQ data") {
  const auto x = dataset_b();
  const auto qq = normal_qq(x);
  REQUIRE(qq.size() == x.size());
  auto sorted = x;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < qq.size(); ++i) {
    CHECK(qq[i].sample == sorted[i]);
    CHECK(qq[i].theoretical == doctest::Approx(-qq[qq.size() - 1 - i].theoretical).epsilon(1e-12));
  }
  CHECK(qq[12].theoretical == doctest::Approx(0.0));
}

TEST_CASE("percentile uses linear interpolation (numpy reference)") {
  const auto a = dataset_a();
  CHECK(percentile(a, 0.10) == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(percentile(a, 0.99) == doctest::Approx(7.84).epsilon(1e-12));
  const auto b = dataset_b();
  CHECK(percentile(b, 0.10) == doctest::Approx(-2.45).epsilon(1e-12));
  CHECK(percentile(b, 0.99) == doctest::Approx(2.75).epsilon(1e-12));
  CHECK_THROWS_AS(percentile(b, 1.5), InputError);
}
