#include "altbm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "altbm/errors.hpp"

namespace altbm {

EmpiricalGenerator empirical_generator(std::span<const PhasePath> paths, std::size_t num_states) {
  if (num_states == 0) throw InvalidArgument("empirical_generator: no states");
  EmpiricalGenerator g;
  g.num_states = num_states;
  g.counts = Matrix(num_states, num_states, 0.0);
  g.holding.assign(num_states, 0.0);
  for (const auto& p : paths) {
    if (p.num_states() != num_states)
      throw InvalidArgument("empirical_generator: path state space differs");
    const auto st = p.states();
    const auto bp = p.breakpoints();
    for (std::size_t k = 0; k < st.size(); ++k) {
      g.holding[st[k]] += p.interval_end(k) - bp[k];
      if (k + 1 < st.size() && st[k + 1] != st[k]) g.counts(st[k], st[k + 1]) += 1.0;
    }
  }
  double total = 0.0;
  for (double r : g.holding) total += r;
  if (!(total > 0.0)) throw NoObservations("empirical_generator: no holding time observed");

  g.estimate = Matrix(num_states, num_states, 0.0);
  g.standard_error = Matrix(num_states, num_states, 0.0);
  g.observed.assign(num_states, false);
  for (std::size_t i = 0; i < num_states; ++i) {
    const double r = g.holding[i];
    if (!(r > 0.0)) continue;
    g.observed[i] = true;
    double row = 0.0;
    for (std::size_t j = 0; j < num_states; ++j) {
      if (j == i) continue;
      const double n = g.counts(i, j);
      g.estimate(i, j) = n / r;
      g.standard_error(i, j) = std::sqrt(n) / r;
      row += n;
    }
    g.estimate(i, i) = -row / r;
    g.standard_error(i, i) = std::sqrt(row) / r;
  }
  return g;
}

GeneratorCheck compare_generator(const EmpiricalGenerator& g, const Matrix& expected,
                                 double bands) {
  if (expected.rows() != g.num_states || expected.cols() != g.num_states)
    throw InvalidArgument("compare_generator: dimension mismatch");
  GeneratorCheck c;
  for (std::size_t i = 0; i < g.num_states; ++i) {
    if (!g.observed[i]) continue;
    for (std::size_t j = 0; j < g.num_states; ++j) {
      const double diff = std::abs(g.estimate(i, j) - expected(i, j));
      const double se = g.standard_error(i, j);
      if (i != j && expected(i, j) == 0.0) {
        if (g.counts(i, j) > 0.0) ++c.zero_block_violations;
        continue;
      }
      if (se > 0.0) {
        const double z = diff / se;
        c.worst_z = std::max(c.worst_z, z);
        if (z > bands) ++c.band_violations;
      } else if (diff > 0.0) {
        // No transitions seen out of an observed state with positive rate.
        ++c.band_violations;
        c.worst_z = std::numeric_limits<double>::infinity();
      }
    }
  }
  return c;
}

McEstimate batch_means(std::span<const double> values, std::size_t batches) {
  if (values.empty()) throw NoObservations("batch_means: no values");
  if (batches < 2) throw InvalidArgument("batch_means: need at least two batches");
  const std::size_t n = values.size();
  McEstimate e;
  e.replications = n;
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / static_cast<double>(n);
  if (n < batches) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.std_error = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    return e;
  }
  const std::size_t size = n / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = b * size;
    const std::size_t hi = b + 1 == batches ? n : lo + size;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += values[i];
    means[b] = s / static_cast<double>(hi - lo);
  }
  double mm = 0.0;
  for (double m : means) mm += m;
  mm /= static_cast<double>(batches);
  double ss = 0.0;
  for (double m : means) ss += (m - mm) * (m - mm);
  e.std_error = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  return e;
}

std::pair<double, double> exact_alt_bm_sample(const ExpAltParams& p, double t, RandomStream& s) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("exact_alt_bm_sample: t must be > 0");
  int y = p.initial_state();
  double tau = 0.0;
  double b = 0.0;
  double bstar = 0.0;
  while (true) {
    const double dur = exp_draw(y == 0 ? p.alpha() : p.beta(), s);
    const double step = std::min(dur, t - tau);
    const double inc = gauss_draw(0.0, step, s);
    b += inc;
    bstar += y == 0 ? inc : -inc;
    tau += dur;
    if (tau >= t) break;
    y = 1 - y;
  }
  return {b, bstar};
}

std::pair<double, double> exact_alt_bm_sample(const MapParams& m, double t, RandomStream& s) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("exact_alt_bm_sample: t must be > 0");
  const std::size_t n = m.size();
  std::size_t state = n - 1;
  {
    const double u = s.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += m.b[i];
      if (u < acc) {
        state = i;
        break;
      }
    }
    while (state > 0 && m.b[state] == 0.0) --state;
  }
  int parity = 0;
  double tau = 0.0;
  double b = 0.0;
  double bstar = 0.0;
  while (true) {
    const double rate = -m.c(state, state);
    const double dur = rate > 0.0 ? exp_draw(rate, s) : std::numeric_limits<double>::infinity();
    const double step = std::min(dur, t - tau);
    const double inc = gauss_draw(0.0, step, s);
    b += inc;
    bstar += parity == 0 ? inc : -inc;
    tau += dur;
    if (tau >= t) break;
    const double target = s.uniform() * rate;
    double acc = 0.0;
    bool chosen = false;
    for (std::size_t j = 0; j < n && !chosen; ++j) {
      acc += m.d(state, j);
      if (target < acc) {
        state = j;
        parity ^= 1;
        chosen = true;
      }
    }
    for (std::size_t j = 0; j < n && !chosen; ++j) {
      if (j == state) continue;
      acc += m.c(state, j);
      if (target < acc) {
        state = j;
        chosen = true;
      }
    }
    if (!chosen) {
      // Rounding at the top of the row: take the last positive rate.
      for (std::size_t j = n; j-- > 0;) {
        if (j != state && m.c(state, j) > 0.0) {
          state = j;
          chosen = true;
          break;
        }
      }
      if (!chosen) {
        for (std::size_t j = n; j-- > 0;) {
          if (m.d(state, j) > 0.0) {
            state = j;
            parity ^= 1;
            break;
          }
        }
      }
    }
  }
  return {b, bstar};
}

std::pair<double, double> exact_alt_bm_sample(const Driver& d, double t, RandomStream& s) {
  return std::visit([&](const auto& p) { return exact_alt_bm_sample(p, t, s); }, d);
}

McEstimate mc_correlation(const Driver& d, double t, std::size_t replications,
                          const RandomStream& s, std::size_t workers) {
  if (replications < 1000) throw InvalidArgument("mc_correlation: need at least 1000 replications");
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("mc_correlation: t must be > 0");
  if (const auto* m = std::get_if<MapParams>(&d)) validate_map(*m);
  const auto values = parallel_map<double>(replications, workers, [&](std::size_t i) {
    RandomStream rs = s.substream(static_cast<std::uint64_t>(i));
    const auto [b, bstar] = exact_alt_bm_sample(d, t, rs);
    return b * bstar / t;
  });
  return batch_means(values);
}

PointMassEstimate sync_point_mass(double alpha, double t, std::size_t replications,
                                  const RandomStream& s) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("sync_point_mass: alpha must be > 0");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("sync_point_mass: t must be >= 0");
  if (replications == 0) throw InvalidArgument("sync_point_mass: no replications");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < replications; ++i) {
    RandomStream rs = s.substream(static_cast<std::uint64_t>(i));
    if (exp_draw(alpha, rs) > t) ++hits;
  }
  PointMassEstimate out;
  const double n = static_cast<double>(replications);
  const double p = static_cast<double>(hits) / n;
  out.estimate = {p, std::sqrt(p * (1.0 - p) / n), replications};
  out.expected = std::exp(-alpha * t);
  out.underpowered = n * out.expected < 30.0;
  return out;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw NoObservations("quantile: no values");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile: p must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - w) + values[hi] * w;
}

namespace {

struct LevelDiag {
  double misalignment = 0.0;
  double value_residual = 0.0;
  double minimum_residual = 0.0;
  double bstar_residual = 0.0;
};

double bstar_residual(const BivariateFlipFlopPath& path) {
  double worst = 0.0;
  for (std::size_t k = 0; k < path.bstar.size(); ++k)
    worst = std::max(worst, std::abs(eval_fluid(path.fluid2, path.chi[k]) - path.bstar[k]));
  return worst;
}

LevelDiag diag_of(const CoupledPair& pair, double horizon) {
  const auto r = coupling_diagnostics(pair, horizon);
  return {r.misalignment, r.value_residual, r.minimum_residual, 0.0};
}

std::vector<LevelDiag> sweep_replication(const SweepSpec& spec, const RandomStream& rs) {
  std::vector<LevelDiag> out(spec.lambdas.size());
  if (spec.construction == Construction::Standard) {
    for (std::size_t i = 0; i < spec.lambdas.size(); ++i)
      out[i] = diag_of(wh_couple_horizon(spec.lambdas[i], spec.horizon,
                                         rs.substream("level-" + std::to_string(i))),
                       spec.horizon);
    return out;
  }

  double base = 0.0;
  if (spec.construction == Construction::ExpAlternating) {
    if (!spec.exp_params) throw InvalidArgument("convergence_sweep: missing driver parameters");
    base = spec.exp_params->base_rate();
  } else {
    if (!spec.map_params) throw InvalidArgument("convergence_sweep: missing MAP parameters");
    base = map_base_rate(*spec.map_params, spec.map_gamma);
  }
  const auto rates = nested_rates(base, spec.lambdas);
  const auto family = build_nested_family(rates, spec.horizon, rs.substream("family"));

  std::vector<int> exp_driver;
  MapTrajectory map_driver;
  if (spec.construction == Construction::ExpAlternating)
    exp_driver = simulate_driver(*spec.exp_params, family.count(0), rs);
  else
    map_driver = simulate_map_driver(discretize_map(*spec.map_params, base / 2.0), family.count(0), rs);

  const RandomStream coupling = rs.substream("coupling");
  for (std::size_t i = 0; i < spec.lambdas.size(); ++i) {
    const auto it = std::find(rates.begin(), rates.end(), spec.lambdas[i]);
    const auto level = static_cast<std::size_t>(it - rates.begin());
    const auto pair = wh_couple_on_epochs(rates[level], family.arrivals[level],
                                          coupling.substream(static_cast<std::uint64_t>(level)));
    out[i] = diag_of(pair, spec.horizon);
    if (pair.epochs() == 0) continue;
    const auto path = spec.construction == Construction::ExpAlternating
                          ? build_alternating_pair(*spec.exp_params, family, level, pair, exp_driver)
                          : build_map_alternating_pair(*spec.map_params, family, level, pair, map_driver);
    out[i].bstar_residual = bstar_residual(path);
  }
  return out;
}

}  // namespace

SweepResult convergence_sweep(const SweepSpec& spec, const RandomStream& s, std::size_t workers) {
  if (spec.lambdas.empty()) throw InvalidArgument("convergence_sweep: no rates");
  if (spec.replications == 0) throw InvalidArgument("convergence_sweep: no replications");
  if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon))
    throw InvalidArgument("convergence_sweep: horizon must be > 0");
  for (std::size_t i = 0; i < spec.lambdas.size(); ++i) {
    if (!(spec.lambdas[i] > 0.0) || !std::isfinite(spec.lambdas[i]))
      throw InvalidArgument("convergence_sweep: rates must be finite and > 0");
    if (i > 0 && !(spec.lambdas[i] > spec.lambdas[i - 1]))
      throw InvalidArgument("convergence_sweep: rates must be strictly increasing");
  }
  if (spec.map_params) validate_map(*spec.map_params);

  const auto reps = parallel_map<std::vector<LevelDiag>>(
      spec.replications, workers, [&](std::size_t r) {
        return sweep_replication(spec, s.substream(static_cast<std::uint64_t>(r)));
      });

  SweepResult out;
  for (std::size_t i = 0; i < spec.lambdas.size(); ++i) {
    SweepRow row;
    row.lambda = spec.lambdas[i];
    std::vector<double> mis;
    mis.reserve(reps.size());
    for (const auto& r : reps) {
      mis.push_back(r[i].misalignment);
      row.value_residual = std::max(row.value_residual, r[i].value_residual);
      row.minimum_residual = std::max(row.minimum_residual, r[i].minimum_residual);
      row.bstar_residual = std::max(row.bstar_residual, r[i].bstar_residual);
    }
    row.median_misalignment = quantile(mis, 0.5);
    row.p90_misalignment = quantile(std::move(mis), 0.9);
    out.rows.push_back(row);
  }

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : out.rows) {
    if (r.median_misalignment > 0.0) {
      xs.push_back(std::log(r.lambda));
      ys.push_back(std::log(r.median_misalignment));
    }
  }
  if (xs.size() >= 2) {
    const double m = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    out.slope = sxy / sxx;
    if (xs.size() > 2) {
      double rss = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - my - out.slope * (xs[i] - mx);
        rss += e * e;
      }
      out.slope_stderr = std::sqrt(rss / (m - 2.0) / sxx);
    }
  }
  out.slope_ci_low = out.slope - 1.96 * out.slope_stderr;
  out.slope_ci_high = out.slope + 1.96 * out.slope_stderr;
  return out;
}

}  // namespace altbm
