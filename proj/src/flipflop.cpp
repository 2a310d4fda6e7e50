#include "altbm/flipflop.hpp"

#include <algorithm>
#include <cmath>

namespace altbm {

void GeneratorMatrix::validate(double tol) const {
  if (!q.square() || q.rows() != states.size())
    throw InvalidArgument("generator: state labels do not match matrix size");
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t j = 0; j < q.cols(); ++j)
      if (i != j && q(i, j) < 0.0) throw InvalidArgument("generator: negative off-diagonal entry");
  if (max_row_sum_error() > tol) throw InvalidArgument("generator: rows do not sum to zero");
}

double GeneratorMatrix::max_row_sum_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    double s = 0.0;
    for (double x : q.row(i)) s += x;
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("flip-flop rate lambda must be finite and > 0");
}

std::vector<double> exp_sequence(double rate, std::size_t n, RandomStream s) {
  std::vector<double> out(n);
  for (auto& x : out) x = exp_draw(rate, s);
  return out;
}

}  // namespace

CoupledPair wh_couple_from_draws(double lambda, std::vector<double> epochs,
                                 std::vector<double> downs, std::vector<double> ups) {
  check_lambda(lambda);
  if (epochs.empty() || downs.size() + 1 != epochs.size() || ups.size() != downs.size())
    throw InvalidArgument("wh_couple: need K+1 epochs and K down/up draws");
  const std::size_t k_max = downs.size();
  const double root = std::sqrt(lambda);

  BrownianSkeleton sk;
  sk.epochs = std::move(epochs);
  sk.values.resize(k_max + 1);
  sk.minima.resize(k_max);
  sk.values[0] = 0.0;

  std::vector<double> xi;
  std::vector<int> states;
  std::vector<double> chi{0.0};
  xi.reserve(2 * k_max + 1);
  states.reserve(2 * k_max + 1);
  double clock = 0.0;
  for (std::size_t k = 0; k < k_max; ++k) {
    if (!(downs[k] > 0.0) || !(ups[k] > 0.0))
      throw InvalidArgument("wh_couple: down/up draws must be > 0");
    sk.minima[k] = sk.values[k] - downs[k];
    sk.values[k + 1] = sk.minima[k] + ups[k];
    xi.push_back(clock);
    states.push_back(phase::kMinus);
    clock += downs[k] / root;
    xi.push_back(clock);
    states.push_back(phase::kPlus);
    clock += ups[k] / root;
    chi.push_back(clock);
  }
  if (k_max == 0) {
    xi.push_back(0.0);
    states.push_back(phase::kMinus);
  }
  sk.validate();

  PhasePath ph(2, std::move(xi), std::move(states), clock);
  FluidPath fl = integrate_phase(ph, root);
  return CoupledPair{lambda,        std::move(sk), std::move(downs), std::move(ups),
                     std::move(ph), std::move(fl), std::move(chi)};
}

CoupledPair wh_couple_on_epochs(double lambda, std::vector<double> epochs, const RandomStream& s) {
  check_lambda(lambda);
  if (epochs.empty()) throw InvalidArgument("wh_couple: epochs must include the origin");
  const std::size_t k_max = epochs.size() - 1;
  const double root = std::sqrt(lambda);
  auto downs = exp_sequence(root, k_max, s.substream("wh-down"));
  auto ups = exp_sequence(root, k_max, s.substream("wh-up"));
  return wh_couple_from_draws(lambda, std::move(epochs), std::move(downs), std::move(ups));
}

CoupledPair wh_couple(double lambda, std::size_t count, const RandomStream& s) {
  check_lambda(lambda);
  if (count == 0) throw InvalidArgument("wh_couple: need at least one skeleton epoch");
  RandomStream theta = s.substream("wh-theta");
  std::vector<double> epochs{0.0};
  for (std::size_t k = 0; k < count; ++k) epochs.push_back(epochs.back() + exp_draw(lambda / 2.0, theta));
  return wh_couple_on_epochs(lambda, std::move(epochs), s);
}

CoupledPair wh_couple_horizon(double lambda, double horizon, const RandomStream& s) {
  check_lambda(lambda);
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InvalidArgument("wh_couple: horizon must be finite and > 0");
  RandomStream theta = s.substream("wh-theta");
  std::vector<double> epochs{0.0};
  for (double t = exp_draw(lambda / 2.0, theta); t <= horizon; t += exp_draw(lambda / 2.0, theta))
    epochs.push_back(t);
  return wh_couple_on_epochs(lambda, std::move(epochs), s);
}

GeneratorMatrix build_standard_generator(double lambda) {
  check_lambda(lambda);
  return {{"1", "-1"}, Matrix{{-lambda, lambda}, {lambda, -lambda}}};
}

GeneratorMatrix build_independent_bivariate_generator(double lambda) {
  check_lambda(lambda);
  const double l = lambda;
  return {{"(1,1)", "(1,-1)", "(-1,1)", "(-1,-1)"},
          Matrix{{-2 * l, l, l, 0}, {l, -2 * l, 0, l}, {l, 0, -2 * l, l}, {0, l, l, -2 * l}}};
}

CouplingReport coupling_diagnostics(const CoupledPair& pair, double horizon) {
  CouplingReport r;
  const auto& sk = pair.skeleton;
  for (std::size_t k = 0; k <= pair.epochs(); ++k) {
    r.value_residual = std::max(r.value_residual, std::abs(eval_fluid(pair.fluid, pair.chi[k]) - sk.values[k]));
    if (k < pair.epochs())
      r.minimum_residual =
          std::max(r.minimum_residual,
                   std::abs(min_on_interval(pair.fluid, pair.chi[k], pair.chi[k + 1]) - sk.minima[k]));
    if (k >= 1 && sk.epochs[k] < horizon && pair.chi[k] < horizon) {
      r.misalignment = std::max(r.misalignment, std::abs(sk.epochs[k] - pair.chi[k]));
      ++r.compared;
    }
  }
  return r;
}

}  // namespace altbm
