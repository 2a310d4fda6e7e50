#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "altbm/exp_alternating.hpp"
#include "altbm/map_alternating.hpp"
#include "altbm/numerics.hpp"
#include "altbm/paths.hpp"
#include "altbm/sampling.hpp"

namespace altbm {

// Maximum-likelihood generator estimate from fully observed phase paths.
struct EmpiricalGenerator {
  std::size_t num_states = 0;
  Matrix counts;          // N_ij, zero diagonal
  Vector holding;         // R_i
  Matrix estimate;        // N_ij / R_i, diagonal = -row sum
  Matrix standard_error;  // sqrt(N_ij) / R_i; diagonal uses the row total
  std::vector<bool> observed;
};

// Throws NoObservations when the paths carry no holding time at all.
EmpiricalGenerator empirical_generator(std::span<const PhasePath> paths, std::size_t num_states);

struct GeneratorCheck {
  double worst_z = 0.0;              // max |estimate - expected| / std_error over nonzero std_error
  std::size_t band_violations = 0;   // entries outside `bands` standard errors
  std::size_t zero_block_violations = 0;  // transitions observed where expected is 0
  bool passed() const noexcept { return band_violations == 0 && zero_block_violations == 0; }
};

// Entrywise comparison; an entry with zero standard error must match exactly.
GeneratorCheck compare_generator(const EmpiricalGenerator& g, const Matrix& expected,
                                 double bands = 3.0);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replications = 0;
};

inline constexpr std::size_t kBatchCount = 30;

// Mean with a batch-means standard error over `batches` contiguous batches.
McEstimate batch_means(std::span<const double> values, std::size_t batches = kBatchCount);

using Driver = std::variant<ExpAltParams, MapParams>;

// (B(t), B*(t)) sampled exactly in law: exact driver jump times plus one
// Gaussian increment per sojourn.
std::pair<double, double> exact_alt_bm_sample(const ExpAltParams& p, double t, RandomStream& s);
std::pair<double, double> exact_alt_bm_sample(const MapParams& m, double t, RandomStream& s);
std::pair<double, double> exact_alt_bm_sample(const Driver& d, double t, RandomStream& s);

// Runs fn(i) for i in [0, n) on `workers` threads; results are returned in
// index order so the output does not depend on the worker count.
template <typename T>
std::vector<T> parallel_map(std::size_t n, std::size_t workers,
                            const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  workers = std::min(workers, n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Monte Carlo estimate of E[B(t) B*(t)] / t. Replication i uses
// s.substream(i). Requires at least 1000 replications.
McEstimate mc_correlation(const Driver& d, double t, std::size_t replications,
                          const RandomStream& s, std::size_t workers = 1);

struct PointMassEstimate {
  McEstimate estimate;      // binomial standard error
  double expected = 1.0;    // e^{-alpha t}
  bool underpowered = false;  // fewer than 30 expected successes
};

// Fraction of replications whose driver stays synchronized on [0, t].
PointMassEstimate sync_point_mass(double alpha, double t, std::size_t replications,
                                  const RandomStream& s);

enum class Construction { Standard, ExpAlternating, MapAlternating };

struct SweepRow {
  double lambda = 0.0;
  double median_misalignment = 0.0;
  double p90_misalignment = 0.0;
  double value_residual = 0.0;     // max |F1(chi_k) - C_k|
  double minimum_residual = 0.0;   // max |interval min - M_k|
  double bstar_residual = 0.0;     // max |F2(chi_k) - B*(theta_k)|, alternating only
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double slope = 0.0;             // least-squares slope of log median vs log lambda
  double slope_stderr = 0.0;
  double slope_ci_low = 0.0;      // slope -+ 1.96 std_error
  double slope_ci_high = 0.0;
};

struct SweepSpec {
  Construction construction = Construction::Standard;
  std::vector<double> lambdas;
  double horizon = 1.0;
  std::size_t replications = 100;
  // Driver parameters for the alternating constructions.
  std::optional<ExpAltParams> exp_params;
  std::optional<MapParams> map_params;
  double map_gamma = 0.0;
};

SweepResult convergence_sweep(const SweepSpec& spec, const RandomStream& s,
                              std::size_t workers = 1);

// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

}  // namespace altbm
