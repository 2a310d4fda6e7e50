#include "altbm/exp_alternating.hpp"

#include <algorithm>
#include <cmath>

namespace altbm {

ExpAltParams::ExpAltParams(double alpha, double beta, DriverStart start)
    : alpha_(alpha), beta_(beta), gamma_(alpha + beta), start_(start) {
  if (!(alpha > 0.0) || !std::isfinite(alpha) || !(beta > 0.0) || !std::isfinite(beta))
    throw InvalidArgument("alpha and beta must be finite and > 0");
}

Matrix ExpAltParams::intensity() const { return Matrix{{-alpha_, alpha_}, {beta_, -beta_}}; }

Matrix uniformized_chain(const ExpAltParams& p, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidArgument("uniformized_chain: rate must be > 0");
  if (rate < std::max(p.alpha(), p.beta()))
    throw RateTooSmall("uniformized_chain: rate below max(alpha, beta)");
  return Matrix::identity(2) + p.intensity() * (1.0 / rate);
}

std::vector<std::size_t> switching_epochs(std::span<const int> driver) {
  if (driver.empty()) throw InvalidArgument("switching_epochs: empty trajectory");
  std::vector<std::size_t> ell{0};
  for (std::size_t m = 1; m < driver.size(); ++m)
    if (driver[m] != driver[m - 1]) ell.push_back(m);
  return ell;
}

std::vector<std::size_t> nesting_index_map(const NestedPoissonFamily& family, std::size_t level,
                                           std::span<const std::size_t> ell) {
  if (level >= family.levels()) throw InvalidArgument("nesting_index_map: no such level");
  std::vector<std::size_t> nu;
  nu.reserve(ell.size());
  for (std::size_t idx : ell) {
    if (idx > family.count(0))
      throw IndexBeyondHorizon("nesting_index_map: level-0 index " + std::to_string(idx) +
                               " beyond the sampled arrivals");
    nu.push_back(family.embed_from_base(idx, level));
  }
  return nu;
}

std::vector<int> simulate_driver(const ExpAltParams& p, std::size_t steps, const RandomStream& s) {
  RandomStream rs = s.substream("driver");
  const double leave0 = p.alpha() / p.gamma();
  const double leave1 = p.beta() / p.gamma();
  std::vector<int> y(steps + 1);
  y[0] = p.initial_state();
  for (std::size_t m = 1; m <= steps; ++m) {
    const double u = rs.uniform();
    const int prev = y[m - 1];
    y[m] = u < (prev == 0 ? leave0 : leave1) ? 1 - prev : prev;
  }
  return y;
}

AlternationSchedule build_schedule(const NestedPoissonFamily& family, std::size_t level,
                                   std::vector<int> parity, std::span<const double> chi) {
  AlternationSchedule sch;
  sch.level = level;
  sch.ell = switching_epochs(parity);
  sch.driver = std::move(parity);
  sch.nu = nesting_index_map(family, level, sch.ell);
  for (std::size_t k = 1; k < sch.nu.size(); ++k)
    if (sch.nu[k] < chi.size()) sch.s_epochs.push_back(chi[sch.nu[k]]);
  return sch;
}

namespace detail {

BivariateFlipFlopPath assemble_alternating(const NestedPoissonFamily& family, std::size_t level,
                                           const CoupledPair& coupled, std::vector<int> parity,
                                           std::span<const int> env, std::size_t env_states) {
  if (level >= family.levels()) throw InvalidArgument("alternating pair: no such family level");
  if (coupled.lambda != family.rates[level])
    throw InvalidArgument("alternating pair: coupled rate differs from the family level rate");
  const std::size_t k_max = coupled.epochs();
  if (k_max == 0) throw InvalidArgument("alternating pair: coupled pair has no epochs");
  if (k_max > family.count(level))
    throw IndexBeyondHorizon("alternating pair: coupled pair extends beyond the family");
  for (std::size_t k = 0; k <= k_max; ++k)
    if (coupled.skeleton.epochs[k] != family.arrivals[level][k])
      throw InvalidArgument("alternating pair: skeleton epochs are not the family arrivals");
  const std::size_t base_size = family.count(0) + 1;
  if (parity.size() < base_size || env.size() < base_size)
    throw IndexBeyondHorizon("alternating pair: driver shorter than the level-0 arrivals");
  parity.resize(base_size);

  BivariateFlipFlopPath out;
  out.lambda = coupled.lambda;
  out.env_states = env_states;
  out.chi = coupled.chi;

  const auto base = family.base_counts(level);
  out.signs.resize(k_max);
  out.env.resize(k_max);
  for (std::size_t j = 0; j < k_max; ++j) {
    out.signs[j] = parity[base[j]] % 2 == 0 ? 1 : -1;
    out.env[j] = env[base[j]];
    if (out.env[j] < 0 || static_cast<std::size_t>(out.env[j]) >= env_states)
      throw InvalidArgument("alternating pair: environment state out of range");
  }

  const auto& sk = coupled.skeleton;
  out.bstar.resize(k_max + 1);
  out.bstar[0] = 0.0;
  for (std::size_t i = 1; i <= k_max; ++i)
    out.bstar[i] = out.bstar[i - 1] + out.signs[i - 1] * (sk.values[i] - sk.values[i - 1]);

  const auto xi = coupled.phase.breakpoints();
  const auto js = coupled.phase.states();
  std::vector<int> states(js.size());
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::size_t j = std::min(i / 2, k_max - 1);
    const int j1 = phase::index_sign(js[i]);
    const int j2 = out.signs[j] * j1;
    states[i] = phase::pair_index(j1, j2) * static_cast<int>(env_states) + out.env[j];
  }
  out.phase = PhasePath(4 * env_states, std::vector<double>(xi.begin(), xi.end()),
                        std::move(states), coupled.phase.horizon());

  const double root = std::sqrt(coupled.lambda);
  const int block = static_cast<int>(env_states);
  out.fluid1 = integrate_phase(out.phase, [=](int s) { return root * phase::pair_first(s / block); });
  out.fluid2 = integrate_phase(out.phase, [=](int s) { return root * phase::pair_second(s / block); });
  out.schedule = build_schedule(family, level, std::move(parity), out.chi);
  return out;
}

}  // namespace detail

BivariateFlipFlopPath build_alternating_pair(const ExpAltParams& p,
                                             const NestedPoissonFamily& family, std::size_t level,
                                             const CoupledPair& coupled,
                                             std::span<const int> driver) {
  if (family.rates.empty() || std::abs(family.rates[0] - p.base_rate()) > 1e-12 * p.base_rate())
    throw InvalidArgument("alternating pair: slowest family rate must equal 2 * gamma");
  for (int y : driver)
    if (y != 0 && y != 1) throw InvalidArgument("alternating pair: driver states must be 0 or 1");
  std::vector<int> parity(driver.begin(), driver.end());
  const std::vector<int> env(parity.size(), 0);
  return detail::assemble_alternating(family, level, coupled, std::move(parity), env, 1);
}

GeneratorMatrix build_exp_alt_generator(double lambda_n, const ExpAltParams& p) {
  if (!(lambda_n > 0.0) || !std::isfinite(lambda_n))
    throw InvalidArgument("generator: lambda must be finite and > 0");
  if (lambda_n < 2.0 * std::max(p.alpha(), p.beta()))
    throw RateTooSmall("generator: lambda_n below 2 max(alpha, beta)");
  const double l = lambda_n;
  const double a2 = 2.0 * p.alpha();
  const double b2 = 2.0 * p.beta();
  return {{"(1,1)", "(1,-1)", "(-1,1)", "(-1,-1)"},
          Matrix{{-l, 0, a2, l - a2}, {0, -l, l - b2, b2}, {0, l, -l, 0}, {l, 0, 0, -l}}};
}

double cov_exp(const ExpAltParams& p, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("cov_exp: t must be > 0");
  const double g = p.gamma();
  const double drift = (p.beta() - p.alpha()) / g * t;
  const double transient = -std::expm1(-g * t) / (g * g);
  return p.start() == DriverStart::Synchronized ? drift + 2.0 * p.alpha() * transient
                                                : drift - 2.0 * p.beta() * transient;
}

double corr_exp(const ExpAltParams& p, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("corr_exp: t must be > 0");
  const double a_inv = 1.0 / p.alpha();
  const double b_inv = 1.0 / p.beta();
  const double g = p.gamma();
  const double limit = (a_inv - b_inv) / (a_inv + b_inv);
  const double transient = -std::expm1(-g * t) / (t * g * g);
  return p.start() == DriverStart::Synchronized ? limit + 2.0 * p.alpha() * transient
                                                : limit - 2.0 * p.beta() * transient;
}

std::vector<double> nested_rates(double base, std::span<const double> lambdas) {
  std::vector<double> rates{base};
  for (double l : lambdas)
    if (l != base || rates.size() > 1) rates.push_back(l);
  return rates;
}

ExpAltRealization simulate_exp_alternating(const ExpAltParams& p, std::span<const double> lambdas,
                                           std::size_t count, double horizon,
                                           const RandomStream& s) {
  const auto rates = nested_rates(p.base_rate(), lambdas);
  ExpAltRealization r{count > 0 ? build_nested_family_first(rates, count, s.substream("family"))
                                : build_nested_family(rates, horizon, s.substream("family")),
                      {}, CoupledPair{}, BivariateFlipFlopPath{}};
  r.driver = simulate_driver(p, r.family.count(0), s);
  const std::size_t top = r.family.levels() - 1;
  r.coupled = wh_couple_on_epochs(r.family.rates[top], r.family.arrivals[top], s.substream("coupling"));
  r.path = build_alternating_pair(p, r.family, top, r.coupled, r.driver);
  return r;
}

}  // namespace altbm
