#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "penalise/step_function.hpp"

using namespace penalise;
using numerics::Integrand1D;
using numerics::Interval;

namespace {

StepFunction random_step(std::mt19937_64& gen, int max_pieces = 6) {
  std::uniform_int_distribution<int> pieces(1, max_pieces), cell(1, 64);
  std::normal_distribution<double> level;
  std::set<int> ends;
  const int n = pieces(gen);
  for (int i = 0; i < n; ++i) ends.insert(cell(gen));
  std::vector<double> r, c;
  for (int m : ends) {
    r.push_back(m / 16.0);
    c.push_back(level(gen));
  }
  return {r, c};
}

// Squared L2 distance between a step function and a smooth f on [0, end),
// integrated cell by cell with tanh-sinh.
double l2_gap_squared(const StepFunction& g, const std::function<double(double)>& f, double end) {
  boost::math::quadrature::tanh_sinh<double> q;
  std::vector<double> cuts{0.0};
  for (double t : g.right_ends()) cuts.push_back(t);
  if (cuts.back() < end) cuts.push_back(end);
  double total = 0.0;
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    const double c = g(0.5 * (cuts[k - 1] + cuts[k]));
    total += q.integrate([&](double s) { return (f(s) - c) * (f(s) - c); }, cuts[k - 1], cuts[k]);
  }
  return total;
}

}  // namespace

TEST_CASE("construction and evaluation") {
  const StepFunction f({1.0, 3.0}, {2.0, -1.0});
  CHECK(f(0.0) == 2.0);
  CHECK(f(0.999) == 2.0);
  CHECK(f(1.0) == -1.0);
  CHECK(f(3.0) == 0.0);
  CHECK(f.integral() == doctest::Approx(0.0));
  CHECK(f.l2_norm_squared() == doctest::Approx(6.0));
  CHECK(f.sqrt_weighted_integral() == doctest::Approx(2.0 * 2.0 - 1.0 * 2.0 * (std::sqrt(3.0) - 1.0)));
  CHECK(StepFunction{}.empty());
  CHECK_THROWS_AS(StepFunction({1.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(StepFunction({1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(StepFunction({0.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(StepFunction::indicator(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("approximate by dyadic averages") {
  const Integrand1D unit{[](double s) { return s < 1.0 ? 1.0 : 0.0; }, Interval{0.0, 1.0}, {1.0}};
  for (int level : {1, 3, 6}) CHECK(approximate(unit, level).normalized() == StepFunction::indicator(0.0, 1.0));

  const Integrand1D ramp{[](double s) { return s < 1.0 ? s : 0.0; }, Interval{0.0, 1.0}, {1.0}};
  const StepFunction a = approximate(ramp, 1);
  REQUIRE(a.size() == 2);
  CHECK(a.levels()[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(a.levels()[1] == doctest::Approx(0.75).epsilon(1e-12));

  const auto e = [](double s) { return std::exp(-s); };
  const Integrand1D expo{e, {}, {}};
  double prev = 0.0;
  for (int level = 2; level <= 7; ++level) {
    // the L2 error on [0, 2^level) ~ 2^-level, plus a tail that is negligible from level 4 on
    const double gap = std::sqrt(l2_gap_squared(approximate(expo, level), e, std::ldexp(1.0, level)) +
                                 0.5 * std::exp(-2.0 * std::ldexp(1.0, level)));
    if (level > 3) CHECK(gap / prev == doctest::Approx(0.5).epsilon(0.05));
    prev = gap;
  }

  const Integrand1D counter{[](double s) { return s > 2.0 ? 1.0 / (std::sqrt(s) * std::log(s)) : 0.0; },
                            Interval{2.0, INFINITY}, {2.0}};
  CHECK_THROWS_WITH_AS(approximate(counter, 3), doctest::Contains("not approximable"), std::invalid_argument);
}

TEST_CASE("project_bridge") {
  CHECK(project_bridge(StepFunction::constant(2.5, 3.0), 3.0).normalized().empty());
  const StepFunction p = project_bridge(StepFunction::indicator(0.0, 0.5), 1.0);
  REQUIRE(p.size() == 2);
  CHECK(p.levels()[0] == doctest::Approx(0.5));
  CHECK(p.levels()[1] == doctest::Approx(-0.5));
  CHECK(p.l2_norm_squared() == doctest::Approx(0.25));
  CHECK_THROWS_AS(project_bridge(p, 0.0), std::invalid_argument);

  std::mt19937_64 gen(7);
  for (int i = 0; i < 200; ++i) {
    const StepFunction f = random_step(gen);
    const double u = 0.1 + 4.0 * std::generate_canonical<double, 53>(gen);
    const StepFunction q = project_bridge(f, u);
    const double head = truncate(f, u).integral();
    CHECK(std::abs(q.integral()) <= 1e-12 * (1.0 + f.sup_norm()) * u);
    CHECK(q.l2_norm_squared() == doctest::Approx(f.energy_until(u) - head * head / u).epsilon(1e-12));
    CHECK(q.l2_norm_squared() <= f.l2_norm_squared() + 1e-12);
    const StepFunction qq = project_bridge(q, u);
    for (std::size_t k = 0; k < q.size(); ++k) CHECK(qq(q.left_end(k)) == doctest::Approx(q.levels()[k]).epsilon(1e-12));
  }
}

TEST_CASE("shift and truncate") {
  CHECK(shift(StepFunction::indicator(2.0, 3.0), 2.0).normalized() == StepFunction::indicator(0.0, 1.0));
  CHECK(truncate(StepFunction::indicator(0.0, 4.0), 1.0).normalized() == StepFunction::indicator(0.0, 1.0));
  CHECK_THROWS_AS(shift(StepFunction::indicator(0.0, 1.0), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(truncate(StepFunction::indicator(0.0, 1.0), -1.0), std::invalid_argument);

  std::mt19937_64 gen(11);
  for (int i = 0; i < 200; ++i) {
    const StepFunction f = random_step(gen);
    const double u = std::ldexp(static_cast<double>(gen() % 64), -4);
    const double t = u + std::ldexp(static_cast<double>(gen() % 64), -4);
    const StepFunction a = shift(truncate(f, t), u).normalized();
    const StepFunction b = truncate(shift(f, u), t - u).normalized();
    CHECK(a == b);
  }
}

TEST_CASE("time change M and its inverse") {
  const StepFunction zero;
  CHECK(time_change_M(zero, 2.5) == 2.5);
  CHECK(time_change_L(zero, 2.5) == 2.5);
  const StepFunction unit = StepFunction::indicator(0.0, 1.0);
  CHECK(time_change_M(unit, 1.0) == doctest::Approx(2.0));
  CHECK(time_change_L(unit, 2.0) == doctest::Approx(1.0));
  CHECK(time_change_M(StepFunction::indicator(0.0, 1.0, 2.0), 0.5) == doctest::Approx(2.5));
  CHECK_THROWS_AS(time_change_L(unit, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(time_change_L(unit, 5.0, 1.0), std::invalid_argument);

  std::mt19937_64 gen(3);
  for (int i = 0; i < 100; ++i) {
    const StepFunction f = random_step(gen);
    for (double t : {0.0, 0.3, 1.0, 2.7, 5.0}) CHECK(time_change_L(f, time_change_M(f, t)) == doctest::Approx(t).epsilon(1e-12));
    for (double v : {0.0, 0.4, 3.3, 9.0}) CHECK(time_change_M(f, time_change_L(f, v)) == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("arithmetic and normalisation") {
  const StepFunction f({1.0, 2.0}, {1.0, 1.0});
  CHECK(f.normalized() == StepFunction::indicator(0.0, 2.0));
  const StepFunction g = StepFunction::indicator(0.0, 2.0) - StepFunction::indicator(1.0, 2.0);
  CHECK(g.normalized() == StepFunction::indicator(0.0, 1.0));
  CHECK((2.0 * f).normalized() == StepFunction::indicator(0.0, 2.0, 2.0));
  CHECK((-f)(0.5) == -1.0);
}

TEST_CASE("JSON round trip and parse errors") {
  const StepFunction f({0.5, 1.25}, {3.0, -0.1});
  CHECK(StepFunction::from_json(f.to_json()) == f);
  CHECK(StepFunction::from_json("[[1.0, 1.0]]") == StepFunction::indicator(0.0, 1.0));
  CHECK(StepFunction::from_json("[]").empty());
  CHECK_THROWS_WITH_AS(StepFunction::from_json("[[1.0, 1.0"), doctest::Contains("parse error at byte"), std::invalid_argument);
  CHECK_THROWS_AS(StepFunction::from_json("{\"a\": 1}"), std::invalid_argument);
  CHECK_THROWS_AS(StepFunction::from_json("[[2.0, 1.0], [1.0, 1.0]]"), std::invalid_argument);
}
