#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "altbm/numerics.hpp"
#include "altbm/paths.hpp"
#include "altbm/sampling.hpp"

namespace altbm {

// Intensity matrix together with the labels of its states.
struct GeneratorMatrix {
  std::vector<std::string> states;
  Matrix q;

  // Throws InvalidArgument unless off-diagonals are >= 0 and every row sums
  // to zero within `tol`.
  void validate(double tol = 1e-12) const;
  double max_row_sum_error() const;
};

// A standard flip-flop and a Brownian skeleton built from the same
// Wiener-Hopf draws.
//
// For k < K: minima[k] = C_k - D_k and C_{k+1} = minima[k] + U_k. The phase
// starts at -1 and alternates; the -1 sojourn starting at chi[k] lasts
// D_k / sqrt(lambda) and the following +1 sojourn U_k / sqrt(lambda), so
// F(chi[k]) = C_k and the minimum of F on [chi[k], chi[k+1]] is minima[k].
struct CoupledPair {
  double lambda = 0.0;
  BrownianSkeleton skeleton;
  std::vector<double> downs;
  std::vector<double> ups;
  PhasePath phase;
  FluidPath fluid;
  std::vector<double> chi;

  std::size_t epochs() const noexcept { return chi.size() - 1; }
};

// Deterministic core of the coupling; `epochs` includes the origin and has
// one more entry than `downs` and `ups`.
CoupledPair wh_couple_from_draws(double lambda, std::vector<double> epochs,
                                 std::vector<double> downs, std::vector<double> ups);

// Couples on the given skeleton epochs (origin included). D_k and U_k are
// exp(sqrt(lambda)) draws from substreams "wh-down" and "wh-up".
CoupledPair wh_couple_on_epochs(double lambda, std::vector<double> epochs, const RandomStream& s);

// Fixed-count mode: K skeleton epochs with exp(lambda/2) spacings drawn from
// substream "wh-theta".
CoupledPair wh_couple(double lambda, std::size_t count, const RandomStream& s);

// Fixed-horizon mode: every Poisson(lambda/2) epoch in (0, horizon].
CoupledPair wh_couple_horizon(double lambda, double horizon, const RandomStream& s);

// 2x2 intensity matrix on (1, -1).
GeneratorMatrix build_standard_generator(double lambda);

// Kronecker sum on (1,1), (1,-1), (-1,1), (-1,-1).
GeneratorMatrix build_independent_bivariate_generator(double lambda);

struct CouplingReport {
  double misalignment = 0.0;      // max_k |theta_k - chi_k|
  double value_residual = 0.0;    // max_k |F(chi_k) - C_k|
  double minimum_residual = 0.0;  // max_k |min F on [chi_k, chi_{k+1}] - M_k|
  std::size_t compared = 0;       // epochs entering the misalignment
};

// Misalignment is taken over k >= 1 with both theta_k and chi_k below
// `horizon`; residuals cover every k.
CouplingReport coupling_diagnostics(const CoupledPair& pair,
                                    double horizon = std::numeric_limits<double>::infinity());

}  // namespace altbm
