#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "altbm/exp_alternating.hpp"
#include "altbm/flipflop.hpp"
#include "altbm/numerics.hpp"
#include "altbm/sampling.hpp"

namespace altbm {

// Continuous-time Markovian arrival process (b, C, D): background chain
// with generator C + D and initial law b; D-transitions are arrivals.
struct MapParams {
  Vector b;
  Matrix c;
  Matrix d;

  std::size_t size() const noexcept { return b.size(); }
  double max_exit_rate() const;  // max_i |C_ii|
};

// Checks every MapParams invariant; throws InvalidMap naming the first
// violated one.
MapParams validate_map(const MapParams& m);

// b = (1, 0), C = diag(-alpha, -beta), D = [[0, alpha], [beta, 0]]: the MAP
// whose arrival parity is the exponential two-state driver.
MapParams exponential_map(double alpha, double beta);

struct DiscreteMapParams {
  Vector b;
  Matrix a0;  // no-arrival transitions
  Matrix a1;  // arrival transitions
};

// (b, I + C / gamma, D / gamma); RateTooSmall when gamma < max_i |C_ii|.
DiscreteMapParams discretize_map(const MapParams& m, double gamma);

// Intensity matrix of (J1, J2) on {1,-1}^2 x S with blocks ordered
// (1,1), (1,-1), (-1,1), (-1,-1). RateTooSmall when
// lambda_n < 2 max_i |C_ii|.
GeneratorMatrix build_map_alt_generator(double lambda_n, const MapParams& m);

// Initial law (0, 0, 0, b) matching build_map_alt_generator's ordering.
Vector map_alt_initial(const MapParams& m);

struct PhaseTypeParams {
  Vector b;  // initial (sub)distribution
  Matrix t;  // subintensity
};

// b (-T)^{-1} e, by one linear solve.
double ph_mean(const PhaseTypeParams& p);

// Integral over t of e^{-qt} E[B(t) B*(t)], evaluated as
// -(1/q) b [I + (C - qI)^{-1} D] [C - qI - D (C - qI)^{-1} D]^{-1} e.
double cov_laplace(const MapParams& m, double q);
// Same expression continued to complex q; used by the numerical inversion.
std::complex<double> cov_laplace(const MapParams& m, std::complex<double> q);

// E[B(t) B*(t)] by Euler inversion of cov_laplace.
double cov_time_domain(const MapParams& m, double t, int terms = kDefaultInversionTerms,
                       double tolerance = kDefaultInversionTolerance);

// cov_time_domain / t; overshoot past +-1 by at most 1e-9 is clipped,
// anything larger raises RangeViolation.
double corr_map(const MapParams& m, double t, int terms = kDefaultInversionTerms,
                double tolerance = kDefaultInversionTolerance);

// Realization of the discrete-time MAP at level-0 indices.
struct MapTrajectory {
  std::vector<int> states;  // underlying chain Y(m)
  std::vector<int> counts;  // arrival counter M(m)
};

// Initial state from substream "driver-initial"; one uniform per step from
// substream "driver", resolved against the arrival row first and the
// no-arrival row second.
MapTrajectory simulate_map_driver(const DiscreteMapParams& dm, std::size_t steps,
                                  const RandomStream& s);

// l(k) = inf { v : M(v) = k }.
std::vector<std::size_t> map_arrival_epochs(std::span<const int> counts);

// Rate of the slowest nested level, 2 max(max_i |C_ii|, gamma_hint).
double map_base_rate(const MapParams& m, double gamma_hint = 0.0);

BivariateFlipFlopPath build_map_alternating_pair(const MapParams& m,
                                                 const NestedPoissonFamily& family,
                                                 std::size_t level, const CoupledPair& coupled,
                                                 const MapTrajectory& driver);

struct MapAltRealization {
  NestedPoissonFamily family;
  MapTrajectory driver;
  CoupledPair coupled;
  BivariateFlipFlopPath path;
};

// Same stream layout as simulate_exp_alternating.
MapAltRealization simulate_map_alternating(const MapParams& m, double gamma_hint,
                                           std::span<const double> lambdas, std::size_t count,
                                           double horizon, const RandomStream& s);

}  // namespace altbm
