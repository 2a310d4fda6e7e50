#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "altbm/errors.hpp"
#include "altbm/sampling.hpp"

using namespace altbm;

namespace {

// Kolmogorov-Smirnov statistic of `xs` against exp(rate).
double ks_exponential(std::vector<double> xs, double rate) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * xs[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return d;
}

// Critical value at significance 0.001 for large n.
double ks_critical(std::size_t n) { return 1.9495 / std::sqrt(static_cast<double>(n)); }

}  // namespace

TEST_CASE("streams are reproducible and substreams independent of creation order") {
  RandomStream a(7, 3), b(7, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  CHECK(a.position() == 100);

  const RandomStream root(99);
  RandomStream x1 = root.substream("x");
  (void)root.substream("y");
  RandomStream x2 = root.substream("x");
  CHECK(x1.uniform() == x2.uniform());
  CHECK(root.substream("x").stream_id() != root.substream("y").stream_id());
  CHECK(root.substream(std::uint64_t{1}).stream_id() != root.substream(std::uint64_t{2}).stream_id());

  RandomStream c(7, 4);
  RandomStream d(7, 3);
  CHECK(c.uniform() != d.uniform());
}

TEST_CASE("uniforms lie strictly inside (0,1)") {
  RandomStream s(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("exp_from_uniform inverse CDF") {
  CHECK(exp_from_uniform(0.5, 2.0) == doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-15));
  CHECK(exp_from_uniform(std::exp(-1.0), 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  RandomStream s(1);
  CHECK_THROWS_AS(exp_draw(0.0, s), InvalidArgument);
}

TEST_CASE("exp_draw law of large numbers and KS") {
  RandomStream s(2);
  const std::size_t n = 1000000;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += exp_draw(4.0, s);
  CHECK(std::abs(sum / n - 0.25) <= 3.0 * 0.25 / 1000.0);

  std::vector<double> xs(10000);
  for (double& x : xs) x = exp_draw(4.0, s);
  CHECK(ks_exponential(xs, 4.0) < ks_critical(xs.size()));
}

TEST_CASE("gauss_draw moments and stream consumption") {
  RandomStream s(3);
  const auto before = s.position();
  CHECK(gauss_draw(1.5, 0.0, s) == 1.5);
  CHECK(s.position() - before == 2);
  CHECK_THROWS_AS(gauss_draw(0.0, -1.0, s), InvalidArgument);

  const std::size_t n = 1000000;
  double m1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) m1 += gauss_draw(0.0, 1.0, s);
  CHECK(std::abs(m1 / n) <= 3e-3);

  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = gauss_draw(0.0, 2.0, s);
    sum += x;
    sq += x * x;
  }
  const double var = (sq - sum * sum / n) / (n - 1);
  CHECK(std::abs(var - 2.0) <= 0.06);
}

TEST_CASE("single-level family: inter-arrival mean and KS") {
  const std::vector<double> rates{6.0};
  const auto f = build_nested_family(rates, 35000.0, RandomStream(4));
  REQUIRE(f.levels() == 1);
  REQUIRE(f.count(0) > 100000);
  std::vector<double> gaps;
  for (std::size_t k = 1; k < f.arrivals[0].size(); ++k)
    gaps.push_back(f.arrivals[0][k] - f.arrivals[0][k - 1]);
  double mean = 0.0;
  for (double g : gaps) mean += g;
  mean /= gaps.size();
  CHECK(std::abs(mean - 1.0 / 3.0) <= 3.0 * (1.0 / 3.0) / std::sqrt(gaps.size()));
  gaps.resize(10000);
  CHECK(ks_exponential(gaps, 3.0) < ks_critical(gaps.size()));
}

TEST_CASE("nested family invariants") {
  const std::vector<double> rates{2.0, 8.0, 32.0};
  const auto f = build_nested_family(rates, 50.0, RandomStream(5));
  REQUIRE(f.levels() == 3);
  for (std::size_t n = 0; n < f.levels(); ++n) {
    CHECK(f.arrivals[n][0] == 0.0);
    for (std::size_t k = 1; k < f.arrivals[n].size(); ++k) {
      CHECK(f.arrivals[n][k] > f.arrivals[n][k - 1]);
      CHECK(f.arrivals[n][k] <= 50.0);
    }
  }
  for (std::size_t n = 0; n + 1 < f.levels(); ++n) {
    CHECK(f.count(n + 1) >= f.count(n));
    for (std::size_t k = 0; k < f.arrivals[n].size(); ++k) {
      const std::size_t j = f.embeddings[n][k];
      CHECK(f.arrivals[n + 1][j] == f.arrivals[n][k]);
      if (k > 0) CHECK(j > f.embeddings[n][k - 1]);
    }
  }
  // KS of inter-arrivals at every level against exp(rate / 2).
  const auto big = build_nested_family(rates, 11000.0, RandomStream(6));
  for (std::size_t n = 0; n < big.levels(); ++n) {
    std::vector<double> gaps;
    for (std::size_t k = 1; k < big.arrivals[n].size() && gaps.size() < 10000; ++k)
      gaps.push_back(big.arrivals[n][k] - big.arrivals[n][k - 1]);
    REQUIRE(gaps.size() == 10000);
    CHECK(ks_exponential(gaps, rates[n] / 2.0) < ks_critical(gaps.size()));
  }
}

TEST_CASE("superposition excess count matches its mean") {
  const std::vector<double> rates{4.0, 10.0};
  const double horizon = 3.0;
  const int reps = 2000;
  double sum = 0.0, sq = 0.0;
  const RandomStream root(7);
  for (int r = 0; r < reps; ++r) {
    const auto f = build_nested_family(rates, horizon, root.substream(static_cast<std::uint64_t>(r)));
    const double excess = static_cast<double>(f.count(1) - f.count(0));
    sum += excess;
    sq += excess * excess;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sq / reps - mean * mean) / (reps - 1));
  CHECK(std::abs(mean - (rates[1] - rates[0]) * horizon / 2.0) <= 3.0 * se);
}

TEST_CASE("nested family is reproducible") {
  const std::vector<double> rates{2.0, 8.0};
  const auto a = build_nested_family(rates, 20.0, RandomStream(8));
  const auto b = build_nested_family(rates, 20.0, RandomStream(8));
  CHECK(a.arrivals == b.arrivals);
  CHECK(a.embeddings == b.embeddings);
}

TEST_CASE("first-K mode truncates at the K-th finest arrival") {
  const std::vector<double> rates{2.0, 8.0};
  const auto f = build_nested_family_first(rates, 500, RandomStream(9));
  CHECK(f.count(1) == 500);
  CHECK(f.horizon == f.arrivals[1].back());
  for (double t : f.arrivals[0]) CHECK(t <= f.horizon);
  // A horizon-mode family on the same stream agrees on the common prefix.
  const auto g = build_nested_family(rates, f.horizon, RandomStream(9));
  CHECK(g.arrivals[1].size() >= 2);
  const std::size_t common = std::min(g.arrivals[1].size(), f.arrivals[1].size());
  CHECK(std::equal(f.arrivals[1].begin(), f.arrivals[1].begin() + common, g.arrivals[1].begin()));
}

TEST_CASE("figure-shaped family: embedding of level 0 into level 1") {
  // Level 1 has ten arrivals; level 0 keeps those at indices 1, 2, 5, 6, 8, 10.
  std::vector<double> l1;
  for (int k = 1; k <= 10; ++k) l1.push_back(0.1 * k);
  const std::vector<double> l0{l1[0], l1[1], l1[4], l1[5], l1[7], l1[9]};
  const auto f = nested_family_from_arrivals({2.0, 4.0}, {l0, l1}, 1.0);
  CHECK(f.embeddings[0] == std::vector<std::size_t>{0, 1, 2, 5, 6, 8, 10});
  CHECK(f.embed_from_base(3, 1) == 5);
  CHECK(f.base_counts(1) == std::vector<std::size_t>{0, 1, 2, 2, 2, 3, 4, 4, 5, 5, 6});

  const std::vector<double> missing{0.15};
  CHECK_THROWS_AS(nested_family_from_arrivals({2.0, 4.0}, {missing, l1}, 1.0), InvalidArgument);
}

TEST_CASE("family preconditions") {
  CHECK_THROWS_AS(build_nested_family(std::vector<double>{4.0, 2.0}, 1.0, RandomStream(1)), InvalidArgument);
  CHECK_THROWS_AS(build_nested_family(std::vector<double>{4.0}, 0.0, RandomStream(1)), InvalidArgument);
  CHECK_THROWS_AS(build_nested_family(std::vector<double>{}, 1.0, RandomStream(1)), InvalidArgument);
}
