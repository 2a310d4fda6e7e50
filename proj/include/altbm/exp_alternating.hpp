#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "altbm/flipflop.hpp"
#include "altbm/numerics.hpp"
#include "altbm/paths.hpp"
#include "altbm/sampling.hpp"

namespace altbm {

enum class DriverStart { Synchronized, Desynchronized };

// Two-state driver {0 = synchronizing, 1 = desynchronizing} with intensity
// matrix [[-alpha, alpha], [beta, -beta]].
class ExpAltParams {
 public:
  ExpAltParams(double alpha, double beta, DriverStart start = DriverStart::Synchronized);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }
  DriverStart start() const noexcept { return start_; }
  int initial_state() const noexcept { return start_ == DriverStart::Synchronized ? 0 : 1; }

  Matrix intensity() const;
  // Slowest rate of the nested family, 2 * gamma.
  double base_rate() const noexcept { return 2.0 * gamma_; }

 private:
  double alpha_;
  double beta_;
  double gamma_;
  DriverStart start_;
};

// I + rate^{-1} * intensity. Throws RateTooSmall when a diagonal entry
// would turn negative.
Matrix uniformized_chain(const ExpAltParams& p, double rate);

// l(0) = 0 and l(k) = first index after l(k-1) where the value changes.
std::vector<std::size_t> switching_epochs(std::span<const int> driver);

// Maps level-0 indices to level `level` through the stored embeddings.
// Throws IndexBeyondHorizon when an index exceeds the level-0 arrivals.
std::vector<std::size_t> nesting_index_map(const NestedPoissonFamily& family, std::size_t level,
                                           std::span<const std::size_t> ell);

// Uniformized driver chain Y(0..steps) at rate gamma, substream "driver";
// one uniform per step.
std::vector<int> simulate_driver(const ExpAltParams& p, std::size_t steps, const RandomStream& s);

// Switching schedule of a driver read through the nesting at one level.
struct AlternationSchedule {
  std::vector<int> driver;          // parity sequence at level-0 indices
  std::vector<std::size_t> ell;     // switching epochs of `driver`
  std::size_t level = 0;
  std::vector<std::size_t> nu;      // nu_level(k) for every k with l(k) in range
  std::vector<double> s_epochs;     // chi[nu(k)] for k >= 1 within the coupled range
};

AlternationSchedule build_schedule(const NestedPoissonFamily& family, std::size_t level,
                                   std::vector<int> parity, std::span<const double> chi);

// Bivariate flip-flop on {1,-1}^2 x S (S has `env_states` elements; 1 for
// the exponential case). Both fluid coordinates use slope sqrt(lambda)
// times the first or second sign coordinate.
struct BivariateFlipFlopPath {
  double lambda = 0.0;
  std::size_t env_states = 1;
  PhasePath phase;
  FluidPath fluid1;
  FluidPath fluid2;
  std::vector<double> chi;
  std::vector<int> signs;      // +1 synchronizing / -1 desynchronizing on [chi_j, chi_{j+1})
  std::vector<int> env;        // environment state on [chi_j, chi_{j+1})
  std::vector<double> bstar;   // sum_i signs[i-1] * (C_i - C_{i-1}) at each skeleton epoch
  AlternationSchedule schedule;
};

namespace detail {

// Shared assembly for both alternating constructions. `parity[m]` and
// `env[m]` are the driver parity and environment after m level-0 arrivals.
BivariateFlipFlopPath assemble_alternating(const NestedPoissonFamily& family, std::size_t level,
                                           const CoupledPair& coupled, std::vector<int> parity,
                                           std::span<const int> env, std::size_t env_states);

}  // namespace detail

// Builds (J1, J2) and (F1, F2) at family level `level` from a coupled pair
// on that level's epochs and a level-0 driver trajectory.
BivariateFlipFlopPath build_alternating_pair(const ExpAltParams& p,
                                             const NestedPoissonFamily& family, std::size_t level,
                                             const CoupledPair& coupled,
                                             std::span<const int> driver);

// Intensity matrix of (J1, J2) on (1,1), (1,-1), (-1,1), (-1,-1).
// RateTooSmall when lambda_n < 2 max(alpha, beta).
GeneratorMatrix build_exp_alt_generator(double lambda_n, const ExpAltParams& p);

// Closed-form correlation E[B(t) B*(t)] / t for t > 0, for either start.
double corr_exp(const ExpAltParams& p, double t);

// E[B(t) B*(t)] in closed form (synchronized or desynchronized start).
double cov_exp(const ExpAltParams& p, double t);

// One full replication of the construction.
struct ExpAltRealization {
  NestedPoissonFamily family;
  std::vector<int> driver;
  CoupledPair coupled;
  BivariateFlipFlopPath path;
};

// Builds the family with rates {2 gamma, lambdas...} (2 gamma may already
// lead `lambdas`), the driver, and the coupling at the finest level.
// Exactly one of `count` (skeleton epochs at the finest level) or `horizon`
// is used: count > 0 selects first-K mode.
// Substreams: "family", "driver", "coupling".
ExpAltRealization simulate_exp_alternating(const ExpAltParams& p, std::span<const double> lambdas,
                                           std::size_t count, double horizon,
                                           const RandomStream& s);

// Rates list {base, lambdas...} with a duplicate leading base removed.
std::vector<double> nested_rates(double base, std::span<const double> lambdas);

}  // namespace altbm
