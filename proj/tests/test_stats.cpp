#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ambc/error.hpp"
#include "ambc/stats.hpp"

using namespace ambc;

namespace {

double brute_force_ks(const std::vector<double>& a, const std::vector<double>& b) {
  auto cdf = [](const std::vector<double>& s, double x) {
    return static_cast<double>(std::count_if(s.begin(), s.end(), [x](double v) { return v <= x; })) /
           static_cast<double>(s.size());
  };
  double d = 0.0;
  for (const auto* s : {&a, &b}) {
    for (double x : *s) d = std::max(d, std::abs(cdf(a, x) - cdf(b, x)));
  }
  return d;
}

}  // namespace

TEST_CASE("empirical CDF is a normalised step function") {
  const std::vector<double> v{0.3, 0.1, 0.3, 0.0, 0.2};
  const auto cdf = empirical_cdf(v);
  REQUIRE(cdf.size() == 4);
  CHECK(cdf[0].value == 0.0);
  CHECK(cdf[0].probability == doctest::Approx(0.2));
  CHECK(cdf[3].value == 0.3);
  CHECK(cdf[3].probability == 1.0);
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    CHECK(cdf[i].value > cdf[i - 1].value);
    CHECK(cdf[i].probability > cdf[i - 1].probability);
  }
  CHECK(empirical_cdf(std::vector<double>{}).empty());
}

TEST_CASE("quantiles are the smallest sample reaching the level") {
  const std::vector<double> v{5, 1, 4, 2, 3};
  CHECK(empirical_quantile(v, 0.0) == 1);
  CHECK(empirical_quantile(v, 0.2) == 1);
  CHECK(empirical_quantile(v, 0.21) == 2);
  CHECK(empirical_quantile(v, 0.5) == 3);
  CHECK(empirical_quantile(v, 0.95) == 5);
  CHECK(empirical_quantile(v, 1.0) == 5);
  std::vector<double> twenty(20);
  for (int i = 0; i < 20; ++i) twenty[static_cast<std::size_t>(i)] = i;
  CHECK(empirical_quantile(twenty, 0.95) == 18);
  CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), Error);
  CHECK_THROWS_AS(empirical_quantile(v, 1.5), Error);
}

TEST_CASE("KS statistic matches a brute-force evaluation") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> level(0, 12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(30 + trial), b(45);
    for (auto& x : a) x = level(rng) / 57.0;
    for (auto& x : b) x = (level(rng) + trial % 3) / 57.0;
    CHECK(ks_two_sample(a, b).statistic == doctest::Approx(brute_force_ks(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("KS p-value follows the Kolmogorov distribution") {
  std::vector<double> a(1000), b(1000);
  for (int i = 0; i < 1000; ++i) a[static_cast<std::size_t>(i)] = i;
  const double ne_sqrt = std::sqrt(500.0);
  const double scale = ne_sqrt + 0.12 + 0.11 / ne_sqrt;
  SUBCASE("near the 5% critical value") {
    const double shift = std::round(1000.0 * 1.358 / scale);
    for (int i = 0; i < 1000; ++i) b[static_cast<std::size_t>(i)] = i + shift;
    const auto r = ks_two_sample(a, b);
    CHECK(r.statistic == doctest::Approx(shift / 1000.0));
    CHECK(r.p_value == doctest::Approx(0.05).epsilon(0.06));
  }
  SUBCASE("near the 1% critical value") {
    const double shift = std::round(1000.0 * 1.628 / scale);
    for (int i = 0; i < 1000; ++i) b[static_cast<std::size_t>(i)] = i + shift;
    CHECK(ks_two_sample(a, b).p_value == doctest::Approx(0.01).epsilon(0.1));
  }
  SUBCASE("identical samples") {
    const auto r = ks_two_sample(a, a);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
  }
  CHECK_THROWS_AS(ks_two_sample(a, std::vector<double>{}), Error);
}

TEST_CASE("KS rarely rejects samples from one distribution") {
  std::mt19937_64 rng(17);
  std::binomial_distribution<int> errors(57, 0.05);
  int rejected = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(250), b(250);
    for (auto& x : a) x = errors(rng) / 57.0;
    for (auto& x : b) x = errors(rng) / 57.0;
    rejected += ks_two_sample(a, b).p_value < 0.05;
  }
  CHECK(rejected <= 20);
}
