#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "altbm/errors.hpp"
#include "altbm/paths.hpp"
#include "altbm/sampling.hpp"

using namespace altbm;

namespace {

PhasePath random_phase(RandomStream& s, std::size_t n) {
  std::vector<double> bp{0.0};
  std::vector<int> st{s.uniform() < 0.5 ? 0 : 1};
  for (std::size_t k = 1; k < n; ++k) {
    bp.push_back(bp.back() + exp_draw(3.0, s));
    st.push_back(1 - st.back());
  }
  return PhasePath(2, bp, st, bp.back() + exp_draw(3.0, s));
}

}  // namespace

TEST_CASE("phase index conventions") {
  CHECK(phase::sign_index(1) == phase::kPlus);
  CHECK(phase::sign_index(-1) == phase::kMinus);
  CHECK(phase::pair_index(1, 1) == 0);
  CHECK(phase::pair_index(1, -1) == 1);
  CHECK(phase::pair_index(-1, 1) == 2);
  CHECK(phase::pair_index(-1, -1) == 3);
  for (int p = 0; p < 4; ++p) CHECK(phase::pair_index(phase::pair_first(p), phase::pair_second(p)) == p);
}

TEST_CASE("phase path validation and lookup") {
  const PhasePath j(2, {0.0, 0.1}, {phase::kMinus, phase::kPlus}, 0.3);
  CHECK(j.state_at(0.0) == phase::kMinus);
  CHECK(j.state_at(0.1) == phase::kPlus);  // right-continuous
  CHECK(j.state_at(0.3) == phase::kPlus);
  CHECK(j.interval_end(0) == 0.1);
  CHECK(j.interval_end(1) == 0.3);
  CHECK_THROWS_AS(j.state_at(0.31), OutOfHorizon);
  CHECK_THROWS_AS(PhasePath(2, {0.0, 0.0}, {0, 1}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(PhasePath(2, {0.1}, {0}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(PhasePath(2, {0.0}, {2}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(PhasePath(2, {0.0, 0.5}, {0, 1}, 0.4), InvalidArgument);
}

TEST_CASE("eval_fluid examples") {
  const FluidPath up({0.0, 1.0}, {2.0});
  CHECK(eval_fluid(up, 0.0) == 0.0);
  CHECK(eval_fluid(up, 0.25) == doctest::Approx(0.5));
  const FluidPath v({0.0, 0.1, 0.3}, {-2.0, 2.0});
  CHECK(eval_fluid(v, 0.1) == doctest::Approx(-0.2));
  CHECK(eval_fluid(v, 0.3) == doctest::Approx(0.2));
  CHECK_THROWS_AS(eval_fluid(v, 0.31), OutOfHorizon);
  CHECK_THROWS_AS(eval_fluid(v, -0.01), OutOfHorizon);
}

TEST_CASE("integrate_phase examples") {
  const PhasePath flat(2, {0.0}, {phase::kPlus}, 2.5);
  CHECK(eval_fluid(integrate_phase(flat, 3.0), 2.5) == doctest::Approx(7.5));

  const PhasePath dv(2, {0.0, 0.1}, {phase::kMinus, phase::kPlus}, 0.3);
  const FluidPath f = integrate_phase(dv, 2.0);
  CHECK(eval_fluid(f, 0.3) == doctest::Approx(0.2));
  CHECK(min_on_interval(f, 0.0, 0.3) == doctest::Approx(-0.2));

  std::vector<double> bp;
  std::vector<int> st;
  for (int k = 0; k < 10; ++k) {
    bp.push_back(0.25 * k);
    st.push_back(k % 2 == 0 ? phase::kPlus : phase::kMinus);
  }
  const FluidPath zig = integrate_phase(PhasePath(2, bp, st, 2.5), 1.7);
  for (int k = 0; k <= 10; k += 2) CHECK(std::abs(eval_fluid(zig, 0.25 * k)) <= 1e-15);
}

TEST_CASE("min_on_interval examples") {
  const FluidPath v({0.0, 0.1, 0.3}, {-2.0, 2.0});
  CHECK(min_on_interval(v, 0.0, 0.3) == doctest::Approx(-0.2));
  CHECK(min_on_interval(v, 0.1, 0.3) == doctest::Approx(-0.2));
  CHECK(min_on_interval(v, 0.15, 0.3) == doctest::Approx(-0.1));
  CHECK_THROWS_AS(min_on_interval(v, 0.2, 0.2), OutOfHorizon);
  CHECK_THROWS_AS(min_on_interval(v, 0.0, 0.4), OutOfHorizon);
}

TEST_CASE("fluid continuity and round trip through the slope signs") {
  RandomStream s(21);
  for (int trial = 0; trial < 200; ++trial) {
    const PhasePath j = random_phase(s, 1 + trial % 30);
    const double scale = 0.5 + 10.0 * s.uniform();
    const FluidPath f = integrate_phase(j, scale);
    CHECK(f.levels()[0] == 0.0);
    for (std::size_t k = 0; k < f.slopes().size(); ++k) {
      const double expect = f.levels()[k] + f.slopes()[k] * (f.breakpoints()[k + 1] - f.breakpoints()[k]);
      CHECK(std::abs(f.levels()[k + 1] - expect) <= 1e-12 * (1.0 + std::abs(expect)));
    }
    const FluidPath again = integrate_phase(phase_of_fluid(f), scale);
    REQUIRE(again.levels().size() == f.levels().size());
    for (std::size_t k = 0; k < f.levels().size(); ++k)
      CHECK(std::abs(again.levels()[k] - f.levels()[k]) <= 1e-12);
  }
}

TEST_CASE("global minimum is attained at a breakpoint") {
  RandomStream s(22);
  for (int trial = 0; trial < 200; ++trial) {
    const FluidPath f = integrate_phase(random_phase(s, 2 + trial % 20), 1.0);
    double m = f.levels()[0];
    for (double v : f.levels()) m = std::min(m, v);
    CHECK(min_on_interval(f, 0.0, f.horizon()) == m);
  }
}

TEST_CASE("skeleton validation") {
  BrownianSkeleton ok{{0.0, 0.5}, {0.0, 0.2}, {-0.2}};
  CHECK_NOTHROW(ok.validate());
  BrownianSkeleton high{{0.0, 0.5}, {0.0, 0.2}, {0.1}};
  CHECK_THROWS_AS(high.validate(), InvalidArgument);
  BrownianSkeleton shifted{{0.0, 0.5}, {0.1, 0.2}, {-0.2}};
  CHECK_THROWS_AS(shifted.validate(), InvalidArgument);
}
