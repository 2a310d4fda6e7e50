#pragma once

#include <cmath>
#include <cstddef>

#include "altbm/map_alternating.hpp"
#include "altbm/numerics.hpp"
#include "altbm/sampling.hpp"

namespace altbm::testing {

// Random valid MAP on n states: exit rates in [0.5, 4.5), split between C
// off-diagonals and D with random weights; b random on the simplex.
inline MapParams random_map(std::size_t n, RandomStream& s) {
  MapParams m{Vector(n, 0.0), Matrix(n, n, 0.0), Matrix(n, n, 0.0)};
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m.b[i] = s.uniform();
    total += m.b[i];
  }
  for (double& v : m.b) v /= total;
  for (std::size_t i = 0; i < n; ++i) {
    const double rate = 0.5 + 4.0 * s.uniform();
    std::vector<double> w(2 * n, 0.0);
    double ws = 0.0;
    for (std::size_t j = 0; j < 2 * n; ++j) {
      if (j == i) continue;  // C_ii is the diagonal
      w[j] = s.uniform();
      ws += w[j];
    }
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) m.c(i, j) = rate * w[j] / ws;
      m.d(i, j) = rate * w[n + j] / ws;
      off += m.c(i, j) + m.d(i, j);
    }
    m.c(i, i) = -off;
  }
  return m;
}

// Closed-form exponential-case transform, q^{-1}[(b-a)/(g q) + 2a/(g(g+q))].
inline double exp_case_transform(double alpha, double beta, double q) {
  const double g = alpha + beta;
  return ((beta - alpha) / (g * q) + 2.0 * alpha / (g * (g + q))) / q;
}

// Closed-form exponential-case covariance (b-a) t/g + 2a(1 - e^{-g t})/g^2.
inline double exp_case_cov(double alpha, double beta, double t) {
  const double g = alpha + beta;
  return (beta - alpha) * t / g + 2.0 * alpha * -std::expm1(-g * t) / (g * g);
}

}  // namespace altbm::testing
