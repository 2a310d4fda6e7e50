#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "altbm/errors.hpp"
#include "altbm/flipflop.hpp"

using namespace altbm;

TEST_CASE("worked coupling") {
  const auto p = wh_couple_from_draws(4.0, {0.0, 0.5}, {0.2}, {0.4});
  CHECK(p.skeleton.minima[0] == doctest::Approx(-0.2));
  CHECK(p.skeleton.values[1] == doctest::Approx(0.2));
  CHECK(p.phase.breakpoints()[1] == doctest::Approx(0.1));
  CHECK(p.chi[1] == doctest::Approx(0.3));
  CHECK(eval_fluid(p.fluid, p.chi[1]) == doctest::Approx(0.2));
  CHECK(min_on_interval(p.fluid, 0.0, p.chi[1]) == doctest::Approx(-0.2));
  const auto r = coupling_diagnostics(p);
  CHECK(r.misalignment == doctest::Approx(0.2));
  CHECK(r.compared == 1);
  CHECK(r.value_residual <= 1e-15);
  CHECK(r.minimum_residual <= 1e-15);
}

TEST_CASE("phase alternates from -1 and identities hold") {
  for (double lambda : {1.0, 16.0, 1024.0}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto p = wh_couple(lambda, 50, RandomStream(seed));
      const auto st = p.phase.states();
      REQUIRE(st.size() == 100);
      for (std::size_t i = 0; i < st.size(); ++i)
        CHECK(st[i] == (i % 2 == 0 ? phase::kMinus : phase::kPlus));
      const auto r = coupling_diagnostics(p);
      CHECK(r.value_residual <= 1e-9);
      CHECK(r.minimum_residual <= 1e-9);
      const auto& sk = p.skeleton;
      for (std::size_t k = 0; k < sk.minima.size(); ++k)
        CHECK(sk.minima[k] <= std::min(sk.values[k], sk.values[k + 1]));
    }
  }
}

TEST_CASE("coupling preconditions") {
  CHECK_THROWS_AS(wh_couple(0.0, 5, RandomStream(1)), InvalidArgument);
  CHECK_THROWS_AS(wh_couple(4.0, 0, RandomStream(1)), InvalidArgument);
  CHECK_THROWS_AS(wh_couple_horizon(4.0, -1.0, RandomStream(1)), InvalidArgument);
  CHECK_THROWS_AS(wh_couple_from_draws(4.0, {0.0, 1.0}, {0.1, 0.2}, {0.1}), InvalidArgument);
}

TEST_CASE("skeleton epochs do not depend on the epoch count") {
  const auto a = wh_couple(9.0, 10, RandomStream(3));
  const auto b = wh_couple(9.0, 40, RandomStream(3));
  for (std::size_t k = 0; k <= 10; ++k) {
    CHECK(a.skeleton.epochs[k] == b.skeleton.epochs[k]);
    CHECK(a.chi[k] == b.chi[k]);
  }
}

TEST_CASE("horizon mode keeps every epoch inside (0, T]") {
  const auto p = wh_couple_horizon(50.0, 2.0, RandomStream(4));
  CHECK(p.skeleton.epochs.back() <= 2.0);
  CHECK(p.epochs() > 20);
}

TEST_CASE("down and up draws: moments and independence") {
  const double lambda = 25.0;
  const auto p = wh_couple(lambda, 100000, RandomStream(5));
  const double n = static_cast<double>(p.downs.size());
  double md = 0, mu = 0;
  for (std::size_t i = 0; i < p.downs.size(); ++i) {
    md += p.downs[i];
    mu += p.ups[i];
  }
  md /= n;
  mu /= n;
  const double mean = 1.0 / std::sqrt(lambda);
  const double se = mean / std::sqrt(n);  // exponential sd equals its mean
  CHECK(std::abs(md - mean) <= 3 * se);
  CHECK(std::abs(mu - mean) <= 3 * se);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < p.downs.size(); ++i) {
    sxy += (p.downs[i] - md) * (p.ups[i] - mu);
    sxx += (p.downs[i] - md) * (p.downs[i] - md);
    syy += (p.ups[i] - mu) * (p.ups[i] - mu);
  }
  CHECK(std::abs(sxy / std::sqrt(sxx * syy)) < 3.0 / std::sqrt(n));
}

TEST_CASE("flip-flop sojourns are exp(lambda) in both phases") {
  const double lambda = 7.0;
  const auto p = wh_couple(lambda, 100000, RandomStream(6));
  double minus = 0, plus = 0;
  std::size_t nm = 0, np = 0;
  for (std::size_t i = 0; i < p.phase.intervals(); ++i) {
    const double d = p.phase.interval_end(i) - p.phase.breakpoints()[i];
    if (p.phase.states()[i] == phase::kMinus) {
      minus += d;
      ++nm;
    } else {
      plus += d;
      ++np;
    }
  }
  // Rate MLE n / total with standard error rate / sqrt(n).
  CHECK(std::abs(nm / minus - lambda) <= 3 * lambda / std::sqrt(nm));
  CHECK(std::abs(np / plus - lambda) <= 3 * lambda / std::sqrt(np));
}

TEST_CASE("mean skeleton epoch equals mean subsampled flip-flop epoch") {
  const int reps = 10000;
  const RandomStream root(7);
  double st = 0, sc = 0, stt = 0, scc = 0;
  for (int r = 0; r < reps; ++r) {
    const auto p = wh_couple(64.0, 32, root.substream(static_cast<std::uint64_t>(r)));
    const double th = p.skeleton.epochs[32];
    const double ch = p.chi[32];
    st += th;
    sc += ch;
    stt += th * th;
    scc += ch * ch;
  }
  const double mt = st / reps, mc = sc / reps;
  const double vt = (stt / reps - mt * mt) / reps;
  const double vc = (scc / reps - mc * mc) / reps;
  CHECK(std::abs(mt - mc) <= 3.0 * std::sqrt(vt + vc));
  CHECK(mt == doctest::Approx(1.0).epsilon(0.02));  // 32 epochs at rate 32
}

TEST_CASE("misalignment shrinks as the rate grows") {
  std::vector<double> medians;
  for (double lambda : {16.0, 256.0, 4096.0}) {
    std::vector<double> m;
    for (std::uint64_t r = 0; r < 101; ++r)
      m.push_back(coupling_diagnostics(wh_couple_horizon(lambda, 1.0, RandomStream(100 + r)), 1.0).misalignment);
    std::nth_element(m.begin(), m.begin() + 50, m.end());
    medians.push_back(m[50]);
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

TEST_CASE("standard and Kronecker-sum generators") {
  CHECK(build_standard_generator(1.0).q == Matrix{{-1, 1}, {1, -1}});
  CHECK(build_standard_generator(5.0).q == Matrix{{-5, 5}, {5, -5}});
  const Matrix k1{{-2, 1, 1, 0}, {1, -2, 0, 1}, {1, 0, -2, 1}, {0, 1, 1, -2}};
  CHECK(build_independent_bivariate_generator(1.0).q == k1);
  CHECK(build_independent_bivariate_generator(3.0).q == k1 * 3.0);

  // Kronecker sum against its definition L (x) I + I (x) L.
  const double l = 2.5;
  const Matrix lam = build_standard_generator(l).q;
  const Matrix ks = build_independent_bivariate_generator(l).q;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const double expect = lam(i / 2, j / 2) * (i % 2 == j % 2) + lam(i % 2, j % 2) * (i / 2 == j / 2);
      CHECK(ks(i, j) == expect);
      CHECK(ks(i, j) == ks(j, i));
    }
  CHECK_NOTHROW(build_independent_bivariate_generator(l).validate());
  CHECK_THROWS_AS(build_standard_generator(-1.0), InvalidArgument);
}
