#include "altbm/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "altbm/errors.hpp"

namespace altbm {

PhasePath::PhasePath(std::size_t num_states, std::vector<double> breakpoints,
                     std::vector<int> states, double horizon)
    : num_states_(num_states),
      breakpoints_(std::move(breakpoints)),
      states_(std::move(states)),
      horizon_(horizon) {
  if (num_states_ == 0) throw InvalidArgument("PhasePath: empty state space");
  if (breakpoints_.empty() || breakpoints_.size() != states_.size())
    throw InvalidArgument("PhasePath: one state per breakpoint required");
  if (breakpoints_.front() != 0.0) throw InvalidArgument("PhasePath: first breakpoint must be 0");
  for (std::size_t k = 1; k < breakpoints_.size(); ++k)
    if (!(breakpoints_[k] > breakpoints_[k - 1]))
      throw InvalidArgument("PhasePath: breakpoints must be strictly increasing");
  if (!(horizon_ >= breakpoints_.back())) throw InvalidArgument("PhasePath: horizon too small");
  for (int s : states_)
    if (s < 0 || static_cast<std::size_t>(s) >= num_states_)
      throw InvalidArgument("PhasePath: state label outside the state space");
}

int PhasePath::state_at(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) throw OutOfHorizon("PhasePath: time outside [0, horizon]");
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return states_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

FluidPath::FluidPath(std::vector<double> breakpoints, std::vector<double> slopes)
    : breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)) {
  if (breakpoints_.size() != slopes_.size() + 1)
    throw InvalidArgument("FluidPath: need one more breakpoint than slopes");
  if (breakpoints_.front() != 0.0) throw InvalidArgument("FluidPath: first breakpoint must be 0");
  levels_.resize(breakpoints_.size());
  levels_[0] = 0.0;
  for (std::size_t k = 0; k < slopes_.size(); ++k) {
    if (!(breakpoints_[k + 1] > breakpoints_[k]))
      throw InvalidArgument("FluidPath: breakpoints must be strictly increasing");
    levels_[k + 1] = levels_[k] + slopes_[k] * (breakpoints_[k + 1] - breakpoints_[k]);
  }
}

void BrownianSkeleton::validate() const {
  if (epochs.empty() || values.size() != epochs.size() || minima.size() + 1 != epochs.size())
    throw InvalidArgument("BrownianSkeleton: inconsistent sizes");
  if (epochs[0] != 0.0 || values[0] != 0.0)
    throw InvalidArgument("BrownianSkeleton: must start at (0, 0)");
  for (std::size_t k = 0; k < minima.size(); ++k) {
    if (!(epochs[k + 1] > epochs[k])) throw InvalidArgument("BrownianSkeleton: epochs not increasing");
    if (minima[k] > std::min(values[k], values[k + 1]))
      throw InvalidArgument("BrownianSkeleton: minimum above an endpoint value at k=" +
                            std::to_string(k));
  }
}

double eval_fluid(const FluidPath& p, double t) {
  const auto bp = p.breakpoints();
  if (!(t >= 0.0 && t <= p.horizon())) throw OutOfHorizon("eval_fluid: time outside [0, horizon]");
  const auto it = std::upper_bound(bp.begin(), bp.end(), t);
  std::size_t k = static_cast<std::size_t>(it - bp.begin()) - 1;
  if (k == p.slopes().size()) return p.levels()[k];  // t == horizon
  if (t == bp[k]) return p.levels()[k];
  return p.levels()[k] + p.slopes()[k] * (t - bp[k]);
}

FluidPath integrate_phase(const PhasePath& j, const std::function<double(int)>& velocity) {
  std::vector<double> breakpoints(j.breakpoints().begin(), j.breakpoints().end());
  std::vector<double> slopes;
  slopes.reserve(j.intervals());
  for (int s : j.states()) slopes.push_back(velocity(s));
  if (j.horizon() > breakpoints.back()) {
    breakpoints.push_back(j.horizon());
  } else {
    // Zero-length final interval carries no information.
    slopes.pop_back();
  }
  return FluidPath(std::move(breakpoints), std::move(slopes));
}

FluidPath integrate_phase(const PhasePath& j, double scale) {
  if (j.num_states() != 2) throw InvalidArgument("integrate_phase: expected a path on {1,-1}");
  return integrate_phase(j, [scale](int s) { return scale * phase::index_sign(s); });
}

double min_on_interval(const FluidPath& p, double a, double b) {
  if (!(a >= 0.0 && a < b && b <= p.horizon()))
    throw OutOfHorizon("min_on_interval: need 0 <= a < b <= horizon");
  double m = std::min(eval_fluid(p, a), eval_fluid(p, b));
  const auto bp = p.breakpoints();
  auto it = std::upper_bound(bp.begin(), bp.end(), a);
  for (; it != bp.end() && *it < b; ++it)
    m = std::min(m, p.levels()[static_cast<std::size_t>(it - bp.begin())]);
  return m;
}

PhasePath phase_of_fluid(const FluidPath& p) {
  const auto bp = p.breakpoints();
  std::vector<double> breakpoints(bp.begin(), bp.end() - 1);
  std::vector<int> states;
  states.reserve(p.slopes().size());
  for (double s : p.slopes()) states.push_back(phase::sign_index(s >= 0.0 ? 1 : -1));
  return PhasePath(2, std::move(breakpoints), std::move(states), p.horizon());
}

}  // namespace altbm
