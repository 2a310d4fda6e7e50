#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace altbm {

// Index conventions for phase labels.
//
// Univariate phases on {1,-1}: index 0 is +1, index 1 is -1.
// Bivariate phases on {1,-1}^2, ordered (1,1), (1,-1), (-1,1), (-1,-1).
// Phases on {1,-1}^2 x S: index = pair_index * |S| + s.
namespace phase {

inline constexpr int kPlus = 0;
inline constexpr int kMinus = 1;

constexpr int sign_index(int sign) noexcept { return sign > 0 ? kPlus : kMinus; }
constexpr int index_sign(int index) noexcept { return index == kPlus ? 1 : -1; }

constexpr int pair_index(int j1, int j2) noexcept {
  return 2 * sign_index(j1) + sign_index(j2);
}
constexpr int pair_first(int pair) noexcept { return index_sign(pair / 2); }
constexpr int pair_second(int pair) noexcept { return index_sign(pair % 2); }

}  // namespace phase

// Right-continuous step function: states[k] holds on
// [breakpoints[k], breakpoints[k+1]), the last one up to `horizon`.
class PhasePath {
 public:
  PhasePath() = default;
  PhasePath(std::size_t num_states, std::vector<double> breakpoints, std::vector<int> states,
            double horizon);

  std::size_t num_states() const noexcept { return num_states_; }
  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const int> states() const noexcept { return states_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t intervals() const noexcept { return states_.size(); }

  double interval_end(std::size_t k) const {
    return k + 1 < breakpoints_.size() ? breakpoints_[k + 1] : horizon_;
  }

  // State at time t (right-continuous); t must lie in [0, horizon].
  int state_at(double t) const;

 private:
  std::size_t num_states_ = 0;
  std::vector<double> breakpoints_;
  std::vector<int> states_;
  double horizon_ = 0.0;
};

// Continuous piecewise-linear path starting at level 0. breakpoints has
// one more entry than slopes; the last breakpoint is the horizon.
class FluidPath {
 public:
  // Trivial path on [0, 0].
  FluidPath() : breakpoints_{0.0}, levels_{0.0} {}
  FluidPath(std::vector<double> breakpoints, std::vector<double> slopes);

  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const double> levels() const noexcept { return levels_; }
  std::span<const double> slopes() const noexcept { return slopes_; }
  double horizon() const noexcept { return breakpoints_.back(); }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> levels_;
  std::vector<double> slopes_;
};

// Poisson-epoch record of a Brownian path: values[k] = B(epochs[k]) and
// minima[k] = min of B between epochs[k] and epochs[k+1].
struct BrownianSkeleton {
  std::vector<double> epochs;
  std::vector<double> values;
  std::vector<double> minima;

  std::size_t size() const noexcept { return epochs.size(); }
  // Throws InvalidArgument when the shape invariants do not hold.
  void validate() const;
};

// Linear interpolation on the containing interval; OutOfHorizon outside
// [0, horizon].
double eval_fluid(const FluidPath& p, double t);

// Integrates a univariate phase path with slope scale * sign(state).
FluidPath integrate_phase(const PhasePath& j, double scale);

// General form: slope on each interval is velocity(state).
FluidPath integrate_phase(const PhasePath& j, const std::function<double(int)>& velocity);

// Exact minimum on [a, b]; attained at an endpoint or an interior breakpoint.
double min_on_interval(const FluidPath& p, double a, double b);

// Phase path whose states are the slope signs of `p` (index convention
// above); the inverse of integrate_phase for unit-magnitude slopes.
PhasePath phase_of_fluid(const FluidPath& p);

}  // namespace altbm
