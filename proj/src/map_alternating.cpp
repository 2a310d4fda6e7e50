#include "altbm/map_alternating.hpp"

#include <algorithm>
#include <cmath>

namespace altbm {

double MapParams::max_exit_rate() const {
  double r = 0.0;
  for (std::size_t i = 0; i < c.rows() && i < c.cols(); ++i) r = std::max(r, std::abs(c(i, i)));
  return r;
}

MapParams validate_map(const MapParams& m) {
  const std::size_t n = m.b.size();
  if (n == 0) throw InvalidMap("b must be nonempty");
  if (m.c.rows() != n || m.c.cols() != n || m.d.rows() != n || m.d.cols() != n)
    throw InvalidMap("C and D must be |S| x |S| with |S| = size of b");
  double total = 0.0;
  for (double x : m.b) {
    if (!std::isfinite(x) || x < 0.0) throw InvalidMap("b entries must be finite and >= 0");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidMap("b must sum to 1");
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double c = m.c(i, j);
      const double d = m.d(i, j);
      if (!std::isfinite(c) || !std::isfinite(d)) throw InvalidMap("C and D must be finite");
      if (d < 0.0) throw InvalidMap("D entries must be >= 0");
      if (i != j && c < 0.0) throw InvalidMap("C off-diagonal entries must be >= 0");
      row += c + d;
    }
    if (!(m.c(i, i) < 0.0)) throw InvalidMap("C diagonal entries must be < 0");
    if (std::abs(row) > 1e-12 * std::max(1.0, std::abs(m.c(i, i))))
      throw InvalidMap("rows of C + D must sum to 0");
  }
  return m;
}

MapParams exponential_map(double alpha, double beta) {
  return validate_map({{1.0, 0.0}, Matrix{{-alpha, 0.0}, {0.0, -beta}},
                       Matrix{{0.0, alpha}, {beta, 0.0}}});
}

DiscreteMapParams discretize_map(const MapParams& m, double gamma) {
  validate_map(m);
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("discretize_map: gamma must be > 0");
  if (gamma < m.max_exit_rate()) throw RateTooSmall("discretize_map: gamma below max |C_ii|");
  DiscreteMapParams dm{m.b, Matrix::identity(m.size()) + m.c * (1.0 / gamma), m.d * (1.0 / gamma)};
  for (std::size_t i = 0; i < m.size(); ++i) dm.a0(i, i) = std::max(0.0, dm.a0(i, i));
  return dm;
}

GeneratorMatrix build_map_alt_generator(double lambda_n, const MapParams& m) {
  validate_map(m);
  if (!(lambda_n > 0.0) || !std::isfinite(lambda_n))
    throw InvalidArgument("generator: lambda must be finite and > 0");
  if (lambda_n < 2.0 * m.max_exit_rate())
    throw RateTooSmall("generator: lambda_n below 2 max |C_ii|");
  const std::size_t n = m.size();
  Matrix q(4 * n, 4 * n);
  auto put = [&](std::size_t br, std::size_t bc, const Matrix& blk) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) q(br * n + i, bc * n + j) = blk(i, j);
  };
  const Matrix lam = Matrix::identity(n) * lambda_n;
  const Matrix stay = lam + m.c * 2.0;
  const Matrix arrive = m.d * 2.0;
  put(0, 0, lam * -1.0);
  put(0, 2, arrive);
  put(0, 3, stay);
  put(1, 1, lam * -1.0);
  put(1, 2, stay);
  put(1, 3, arrive);
  put(2, 1, lam);
  put(2, 2, lam * -1.0);
  put(3, 0, lam);
  put(3, 3, lam * -1.0);

  std::vector<std::string> labels;
  const char* pairs[] = {"(1,1", "(1,-1", "(-1,1", "(-1,-1"};
  for (const char* p : pairs)
    for (std::size_t s = 0; s < n; ++s) labels.push_back(std::string(p) + "," + std::to_string(s) + ")");
  return {std::move(labels), std::move(q)};
}

Vector map_alt_initial(const MapParams& m) {
  validate_map(m);
  Vector init(4 * m.size(), 0.0);
  std::copy(m.b.begin(), m.b.end(), init.begin() + static_cast<std::ptrdiff_t>(3 * m.size()));
  return init;
}

double ph_mean(const PhaseTypeParams& p) {
  const std::size_t n = p.b.size();
  if (n == 0 || !p.t.square() || p.t.rows() != n) throw InvalidArgument("ph_mean: size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && p.t(i, j) < 0.0) throw InvalidArgument("ph_mean: negative off-diagonal rate");
      row += p.t(i, j);
    }
    if (row > 1e-12 * std::max(1.0, std::abs(p.t(i, i))))
      throw InvalidArgument("ph_mean: subintensity row sums must be <= 0");
  }
  const Vector ones(n, 1.0);
  const Vector x = solve_linear(p.t * -1.0, ones);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] < -1e-12 * std::max(1.0, std::abs(x[i])))
      throw SingularMatrix("ph_mean: (-T)^{-1} has negative entries");
    mean += p.b[i] * x[i];
  }
  return mean;
}

namespace {

template <typename M, typename T>
T cov_laplace_impl(const MapParams& m, T q) {
  const std::size_t n = m.size();
  M c(n, n), d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      c(i, j) = m.c(i, j);
      d(i, j) = m.d(i, j);
    }
  M shifted = c;
  for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= q;
  const M x = solve_linear(shifted, d);  // (C - qI)^{-1} D
  const M left = M::identity(n) + x;
  const M inner = shifted - d * x;
  M ones(n, 1, T{1});
  const M y = solve_linear(inner, ones);
  T acc{};
  for (std::size_t i = 0; i < n; ++i) {
    T row{};
    for (std::size_t j = 0; j < n; ++j) row += left(i, j) * y(j, 0);
    acc += m.b[i] * row;
  }
  return -acc / q;
}

}  // namespace

double cov_laplace(const MapParams& m, double q) {
  validate_map(m);
  if (!(q > 0.0) || !std::isfinite(q)) throw InvalidArgument("cov_laplace: q must be > 0");
  return cov_laplace_impl<Matrix, double>(m, q);
}

std::complex<double> cov_laplace(const MapParams& m, std::complex<double> q) {
  if (!(q.real() > 0.0)) throw InvalidArgument("cov_laplace: Re q must be > 0");
  return cov_laplace_impl<ComplexMatrix, std::complex<double>>(m, q);
}

double cov_time_domain(const MapParams& m, double t, int terms, double tolerance) {
  const MapParams valid = validate_map(m);
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("cov_time_domain: t must be > 0");
  return invert_laplace([&valid](std::complex<double> q) { return cov_laplace(valid, q); }, t,
                        terms, tolerance);
}

double corr_map(const MapParams& m, double t, int terms, double tolerance) {
  const double r = cov_time_domain(m, t, terms, tolerance) / t;
  if (std::abs(r) > 1.0 + 1e-9)
    throw RangeViolation("corr_map: correlation " + std::to_string(r) + " outside [-1, 1]");
  return std::clamp(r, -1.0, 1.0);
}

MapTrajectory simulate_map_driver(const DiscreteMapParams& dm, std::size_t steps,
                                  const RandomStream& s) {
  const std::size_t n = dm.b.size();
  MapTrajectory out;
  out.states.resize(steps + 1);
  out.counts.resize(steps + 1);

  RandomStream init = s.substream("driver-initial");
  const double u0 = init.uniform();
  double acc = 0.0;
  int start = static_cast<int>(n) - 1;
  for (std::size_t i = 0; i < n; ++i) {
    acc += dm.b[i];
    if (u0 < acc) {
      start = static_cast<int>(i);
      break;
    }
  }
  while (start > 0 && dm.b[static_cast<std::size_t>(start)] == 0.0) --start;
  out.states[0] = start;
  out.counts[0] = 0;

  RandomStream rs = s.substream("driver");
  for (std::size_t k = 1; k <= steps; ++k) {
    const std::size_t y = static_cast<std::size_t>(out.states[k - 1]);
    const double u = rs.uniform();
    double cum = 0.0;
    int next = -1;
    bool arrival = false;
    for (std::size_t j = 0; j < n && next < 0; ++j) {
      cum += dm.a1(y, j);
      if (u < cum) {
        next = static_cast<int>(j);
        arrival = true;
      }
    }
    for (std::size_t j = 0; j < n && next < 0; ++j) {
      cum += dm.a0(y, j);
      if (u < cum) next = static_cast<int>(j);
    }
    if (next < 0) {
      // Rounding left the row total just under u; take the last positive entry.
      for (std::size_t j = n; j-- > 0 && next < 0;)
        if (dm.a0(y, j) > 0.0) next = static_cast<int>(j);
      for (std::size_t j = n; j-- > 0 && next < 0;)
        if (dm.a1(y, j) > 0.0) {
          next = static_cast<int>(j);
          arrival = true;
        }
    }
    out.states[k] = next;
    out.counts[k] = out.counts[k - 1] + (arrival ? 1 : 0);
  }
  return out;
}

std::vector<std::size_t> map_arrival_epochs(std::span<const int> counts) {
  if (counts.empty() || counts[0] != 0)
    throw InvalidArgument("map_arrival_epochs: counter must start at 0");
  std::vector<std::size_t> ell{0};
  for (std::size_t v = 1; v < counts.size(); ++v) {
    if (counts[v] - counts[v - 1] > 1 || counts[v] < counts[v - 1])
      throw InvalidArgument("map_arrival_epochs: counter must grow by 0 or 1 per step");
    if (counts[v] > counts[v - 1]) ell.push_back(v);
  }
  return ell;
}

double map_base_rate(const MapParams& m, double gamma_hint) {
  return 2.0 * std::max(validate_map(m).max_exit_rate(), gamma_hint);
}

BivariateFlipFlopPath build_map_alternating_pair(const MapParams& m,
                                                 const NestedPoissonFamily& family,
                                                 std::size_t level, const CoupledPair& coupled,
                                                 const MapTrajectory& driver) {
  validate_map(m);
  if (family.rates.empty() || family.rates[0] / 2.0 < m.max_exit_rate())
    throw RateTooSmall("MAP alternating pair: slowest family rate below 2 max |C_ii|");
  if (driver.states.size() != driver.counts.size())
    throw InvalidArgument("MAP alternating pair: malformed driver trajectory");
  std::vector<int> parity(driver.counts.size());
  for (std::size_t v = 0; v < parity.size(); ++v) parity[v] = driver.counts[v] % 2;
  return detail::assemble_alternating(family, level, coupled, std::move(parity), driver.states,
                                      m.size());
}

MapAltRealization simulate_map_alternating(const MapParams& m, double gamma_hint,
                                           std::span<const double> lambdas, std::size_t count,
                                           double horizon, const RandomStream& s) {
  const double base = map_base_rate(m, gamma_hint);
  const auto rates = nested_rates(base, lambdas);
  const DiscreteMapParams dm = discretize_map(m, base / 2.0);
  MapAltRealization r{count > 0 ? build_nested_family_first(rates, count, s.substream("family"))
                                : build_nested_family(rates, horizon, s.substream("family")),
                      {}, CoupledPair{}, BivariateFlipFlopPath{}};
  r.driver = simulate_map_driver(dm, r.family.count(0), s);
  const std::size_t top = r.family.levels() - 1;
  r.coupled = wh_couple_on_epochs(r.family.rates[top], r.family.arrivals[top], s.substream("coupling"));
  r.path = build_map_alternating_pair(m, r.family, top, r.coupled, r.driver);
  return r;
}

}  // namespace altbm
