#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "penalise/wiener.hpp"

using namespace penalise;
using numerics::TiltingConfig;

TEST_CASE("stieltjes sums on a fixed path") {
  const SamplePath p{TimeGrid::from_times({0.0, 1.0, 2.0, 3.0}), {0.0, 1.0, -1.0, 2.0}};
  const IntegralValue a = stieltjes(StepFunction({1.0, 3.0}, {2.0, 0.5}), p);
  CHECK(a.value == doctest::Approx(2.0 * 1.0 + 0.5 * 1.0));
  CHECK(a.aligned);
  const IntegralValue b = stieltjes(StepFunction::indicator(0.0, 1.5), p);
  CHECK(b.value == doctest::Approx(0.0));
  CHECK_FALSE(b.aligned);
  CHECK(stieltjes(StepFunction{}, p).value == 0.0);
  CHECK_THROWS_AS(stieltjes(StepFunction::indicator(0.0, 4.0), p), std::invalid_argument);
  CHECK(stieltjes_scale(StepFunction::indicator(0.0, 1.0, -2.0), p) == doctest::Approx(2.0));
}

TEST_CASE("Brownian isometry") {
  const StepFunction f({0.5, 1.0, 2.0}, {1.0, -2.0, 0.5});
  const TimeGrid g = TimeGrid::uniform(2.0, 0.5);
  RandomStream rng({31, 0});
  Estimate sq;
  for (int i = 0; i < 100000; ++i) {
    const double v = stieltjes(f, sample_bm(g, rng)).value;
    sq.add(v * v);
  }
  CHECK(std::abs(sq.mean() - f.l2_norm_squared()) <= 4.0 * sq.stderr());
}

TEST_CASE("bridge integral identity") {
  const StepFunction f({0.25, 0.75, 1.0}, {1.0, 3.0, -1.0});
  const TimeGrid g = TimeGrid::uniform(1.0, 1.0 / 16);
  RandomStream rng({31, 1});
  Estimate sq;
  for (int i = 0; i < 20000; ++i) {
    const BridgeIntegral b = bridge_integral(f, 1.0, sample_bridge(1.0, g, rng));
    CHECK_FALSE(b.residual > 1e-10);
    sq.add(b.value.value * b.value.value);
  }
  CHECK(std::abs(sq.mean() - project_bridge(f, 1.0).l2_norm_squared()) <= 4.0 * sq.stderr());

  BridgeSample broken = sample_bridge(1.0, g, SeedSpec{31, 2});
  broken.driver.values[4] += 1.0;
  CHECK_THROWS_AS(bridge_integral(f, 1.0, broken), std::logic_error);
}

TEST_CASE("centered BES(3) integral has mean zero") {
  const StepFunction f({1.0, 2.0}, {1.0, -0.5});
  const TimeGrid g = TimeGrid::from_times({0.0, 1.0, 2.0});
  RandomStream rng({31, 3});
  Estimate m;
  for (int i = 0; i < 100000; ++i) m.add(bessel_integral_centered(f, sample_bessel3(g, rng)).value);
  CHECK(std::abs(m.mean()) <= 4.0 * m.stderr());
}

TEST_CASE("decomposition and partial integrals") {
  const auto tilt = TiltingConfig::exponential_weight();
  const StepFunction f({0.5, 1.5, 3.0}, {2.0, -1.0, 0.75});
  const TimeGrid grid = TimeGrid::uniform(4.0, 1.0 / 32);
  const TimeGrid t_grid = TimeGrid::from_times({0.0, 0.5, 1.0, 2.0, 4.0});
  RandomStream rng({31, 4});
  for (int i = 0; i < 200; ++i) {
    const TiltedSample s = sample_tilted(tilt, 4.0, grid, rng);
    const Decomposition d = decompose_integral(f, s);
    CHECK(std::abs(d.whole.value - d.j1.value - d.j2.value) <= 1e-10 * (1.0 + d.scale));
    const auto partial = partial_integrals(f, s, t_grid);
    REQUIRE(partial.size() == t_grid.size());
    CHECK(partial.front().value == 0.0);
    CHECK(std::abs(partial.back().value - d.whole.value) <= 1e-10 * (1.0 + d.scale));
    CHECK(std::abs(partial[2].value - stieltjes(truncate(f, 1.0), s.full).value) <= 1e-10 * (1.0 + d.scale));
  }
}

TEST_CASE("centered tail integral has mean zero") {
  const auto tilt = TiltingConfig::exponential_weight();
  const StepFunction f({1.0, 2.0}, {1.0, 0.5});
  MonteCarloOptions o;
  o.n_paths = 50000;
  o.seed = 8;
  o.horizon = 4.0;
  o.nodes = TimeGrid::from_times({0.0, 1.0, 2.0, 4.0});
  const WEstimate e = w_expectation([&](const TiltedSample& s) { return centered_tail_integral(f, s); }, tilt, o);
  CHECK(std::abs(e.estimate.mean()) <= 4.0 * e.estimate.stderr());
}

TEST_CASE("Holder increment moment") {
  const auto tilt = TiltingConfig::exponential_weight();
  const StepFunction f({1.0, 2.0}, {1.0, 2.0});
  MonteCarloOptions o;
  o.n_paths = 20000;
  o.seed = 9;
  o.horizon = 4.0;
  const HolderMoment h = holder_increment_moment(f, tilt, 0.5, 3.0, o);
  CHECK(h.t1 == doctest::Approx(time_change_L(f, 0.5)));
  CHECK(h.t2 == doctest::Approx(time_change_L(f, 3.0)));
  CHECK(h.energy == doctest::Approx(f.energy_until(h.t2) - f.energy_until(h.t1)));
  CHECK(h.bound_time == doctest::Approx(3.0 * 2.5 * 2.5));
  CHECK(h.bound_max == doctest::Approx(3.0 * std::max(h.energy, h.energy * h.energy)));
  CHECK(h.fourth.count() == 20000);
  CHECK(h.fourth.mean() <= h.bound_max + 4.0 * h.fourth.stderr());
  CHECK_THROWS_AS(holder_increment_moment(f, tilt, 2.0, 1.0, o), std::invalid_argument);
  CHECK_THROWS_AS(holder_increment_moment(f, tilt, -1.0, 1.0, o), std::invalid_argument);
}
