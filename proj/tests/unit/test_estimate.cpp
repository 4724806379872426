#include <cmath>
#include <random>

#include "doctest.h"
#include "penalise/estimate.hpp"

using namespace penalise;

TEST_CASE("estimate of a small sample") {
  Estimate e;
  for (double x : {1.0, 2.0, 3.0, 4.0}) e.add(x);
  CHECK(e.count() == 4);
  CHECK(e.mean() == doctest::Approx(2.5));
  CHECK(e.m2() == doctest::Approx(5.0));
  CHECK(e.m3() == doctest::Approx(0.0));
  CHECK(e.m4() == doctest::Approx(2.0 * (std::pow(1.5, 4) + std::pow(0.5, 4))));
  CHECK(e.variance() == doctest::Approx(5.0 / 3.0));
  CHECK(e.stderr() == doctest::Approx(std::sqrt(5.0 / 12.0)));
  CHECK(e.excess_kurtosis() == doctest::Approx(4.0 * e.m4() / 25.0 - 3.0));
}

TEST_CASE("merge equals concatenation") {
  std::mt19937_64 gen(1);
  std::lognormal_distribution<double> law(0.0, 1.0);
  std::vector<double> xs(10001);
  for (auto& x : xs) x = law(gen);
  for (std::size_t cut : {std::size_t{0}, std::size_t{1}, std::size_t{37}, std::size_t{5000}, xs.size()}) {
    Estimate all, a, b;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      all.add(xs[i]);
      (i < cut ? a : b).add(xs[i]);
    }
    a.merge(b);
    CHECK(a.count() == all.count());
    CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-10));
    CHECK(a.m2() == doctest::Approx(all.m2()).epsilon(1e-10));
    CHECK(a.m3() == doctest::Approx(all.m3()).epsilon(1e-10));
    CHECK(a.m4() == doctest::Approx(all.m4()).epsilon(1e-10));
  }
}

TEST_CASE("gaussian kurtosis is near zero within its standard error") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> law;
  Estimate e;
  for (int i = 0; i < 200000; ++i) e.add(law(gen));
  CHECK(std::abs(e.excess_kurtosis()) <= 4.0 * e.kurtosis_stderr());
  CHECK(e.kurtosis_stderr() == doctest::Approx(std::sqrt(24.0 / 200000.0)).epsilon(0.01));
}

TEST_CASE("ratio estimate") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> law;
  RatioEstimate r, left, right;
  for (int i = 0; i < 100000; ++i) {
    const double b = 2.0 + law(gen);
    const double a = 0.5 * b + 0.1 * law(gen);
    r.add(a, b);
    (i % 3 ? left : right).add(a, b);
  }
  CHECK(std::abs(r.ratio() - 0.5) <= 4.0 * r.stderr());
  CHECK(r.stderr() > 0.0);
  left.merge(right);
  CHECK(left.count() == r.count());
  CHECK(left.ratio() == doctest::Approx(r.ratio()).epsilon(1e-10));
  CHECK(left.stderr() == doctest::Approx(r.stderr()).epsilon(1e-8));
  CHECK(r.denominator_mean() == doctest::Approx(2.0).epsilon(0.01));
  CHECK(r.denominator_stderr() == doctest::Approx(1.0 / std::sqrt(100000.0)).epsilon(0.02));
}
