#include "altbm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "altbm/errors.hpp"
#include "altbm/flipflop.hpp"
#include "altbm/io.hpp"
#include "json.hpp"

#ifndef ALTBM_VERSION
#define ALTBM_VERSION "0.0.0"
#endif

namespace altbm::cli {

using nlohmann::json;

std::string_view command_name(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Generator: return "generator";
    case Command::Correlation: return "correlation";
    case Command::Laplace: return "laplace";
    case Command::Converge: return "converge";
  }
  return "";
}

std::string_view construction_name(Construction c) {
  switch (c) {
    case Construction::Standard: return "standard";
    case Construction::ExpAlternating: return "exp-alt";
    case Construction::MapAlternating: return "map-alt";
  }
  return "";
}

namespace {

const std::set<std::string> kKnownKeys{
    "command", "seed",      "construction", "alpha",       "beta",         "start",
    "map",     "lambda",    "lambdas",      "horizon",     "epochs",       "t_grid",
    "q_grid",  "replications", "workers",   "formats",     "inversion",    "empirical_time",
    "independent_pair"};

Command parse_command(std::string_view s) {
  for (Command c : {Command::Simulate, Command::Generator, Command::Correlation, Command::Laplace,
                    Command::Converge})
    if (command_name(c) == s) return c;
  throw ConfigError("unknown command '" + std::string(s) + "'");
}

Construction parse_construction(const std::string& s) {
  for (Construction c : {Construction::Standard, Construction::ExpAlternating, Construction::MapAlternating})
    if (construction_name(c) == s) return c;
  throw ConfigError("unknown construction '" + s + "' (standard, exp-alt, map-alt)");
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + key + "' has the wrong type");
  }
}

double get_number(const json& j, const std::string& key) {
  if (!j.at(key).is_number()) throw ConfigError("field '" + key + "' must be a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ConfigError("field '" + key + "' must be finite");
  return v;
}

std::size_t get_count(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError("field '" + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> get_numbers(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError("field '" + key + "' must be a nonempty array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError("field '" + key + "' must hold numbers");
    out.push_back(x.get<double>());
    if (!std::isfinite(out.back())) throw ConfigError("field '" + key + "' must hold finite numbers");
  }
  return out;
}

Matrix get_matrix(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError("map." + key + " must be a nonempty array of rows");
  const std::size_t n = v.size();
  Matrix m(n, v[0].is_array() && !v[0].empty() ? v[0].size() : 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!v[i].is_array() || v[i].size() != m.cols())
      throw ConfigError("map." + key + " rows must be arrays of equal length");
    for (std::size_t k = 0; k < m.cols(); ++k) {
      if (!v[i][k].is_number()) throw ConfigError("map." + key + " entries must be numbers");
      m(i, k) = v[i][k].get<double>();
    }
  }
  return m;
}

void require_grid_positive(const std::vector<double>& g, const std::string& key) {
  for (double x : g)
    if (!(x > 0.0)) throw ConfigError("every " + key + " entry must be > 0");
}

json parse_override_value(const std::string& raw) {
  try {
    return json::parse(raw);
  } catch (const json::exception&) {
    return json(raw);
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, std::string_view command,
                              const std::vector<std::string>& overrides) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    j[o.substr(0, eq)] = parse_override_value(o.substr(eq + 1));
  }
  for (const auto& [k, v] : j.items())
    if (!kKnownKeys.count(k)) throw ConfigError("unknown field '" + k + "'");

  ExperimentConfig c;
  c.command = parse_command(command);
  if (j.contains("command") && get_as<std::string>(j, "command") != command)
    throw ConfigError("config command '" + get_as<std::string>(j, "command") +
                      "' disagrees with the command line");
  j["command"] = std::string(command);

  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) throw ConfigError("field 'seed' must be an integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  j["seed"] = c.seed;
  c.construction = parse_construction(j.value("construction", std::string("standard")));

  if (c.construction == Construction::ExpAlternating) {
    if (!j.contains("alpha") || !j.contains("beta")) throw ConfigError("exp-alt needs 'alpha' and 'beta'");
    const std::string start = j.value("start", std::string("synchronized"));
    if (start != "synchronized" && start != "desynchronized")
      throw ConfigError("'start' must be synchronized or desynchronized");
    c.exp.emplace(get_number(j, "alpha"), get_number(j, "beta"),
                  start == "synchronized" ? DriverStart::Synchronized : DriverStart::Desynchronized);
  } else if (c.construction == Construction::MapAlternating) {
    if (!j.contains("map") || !j["map"].is_object()) throw ConfigError("map-alt needs a 'map' object");
    const json& m = j["map"];
    for (const auto& [k, v] : m.items())
      if (k != "b" && k != "C" && k != "D" && k != "gamma") throw ConfigError("unknown field 'map." + k + "'");
    if (!m.contains("b") || !m.contains("C") || !m.contains("D"))
      throw ConfigError("'map' needs b, C and D");
    c.map = validate_map({get_numbers(m, "b"), get_matrix(m, "C"), get_matrix(m, "D")});
    if (m.contains("gamma")) {
      c.map_gamma = get_number(m, "gamma");
      if (c.map_gamma < 0.0) throw ConfigError("map.gamma must be >= 0");
    }
  }

  if (j.contains("lambda") && j.contains("lambdas")) throw ConfigError("give 'lambda' or 'lambdas', not both");
  if (j.contains("lambda")) c.lambdas = {get_number(j, "lambda")};
  if (j.contains("lambdas")) c.lambdas = get_numbers(j, "lambdas");
  for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
    if (!(c.lambdas[i] > 0.0)) throw ConfigError("rates must be > 0");
    if (i > 0 && !(c.lambdas[i] > c.lambdas[i - 1])) throw ConfigError("'lambdas' must be strictly increasing");
  }
  if (j.contains("horizon")) {
    c.horizon = get_number(j, "horizon");
    if (!(c.horizon > 0.0)) throw ConfigError("'horizon' must be > 0");
  }
  if (j.contains("epochs")) c.epochs = get_count(j, "epochs");
  if (j.contains("t_grid")) {
    c.t_grid = get_numbers(j, "t_grid");
    require_grid_positive(c.t_grid, "t_grid");
  }
  if (j.contains("q_grid")) {
    c.q_grid = get_numbers(j, "q_grid");
    require_grid_positive(c.q_grid, "q_grid");
  }
  if (j.contains("replications")) c.replications = get_count(j, "replications");
  c.workers = std::max(1u, std::thread::hardware_concurrency());
  if (j.contains("workers")) {
    const std::size_t w = get_count(j, "workers");
    if (w > 0) c.workers = w;
  }
  if (j.contains("formats")) {
    const auto& f = j["formats"];
    if (!f.is_array() || f.empty()) throw ConfigError("'formats' must be a nonempty array");
    c.formats.clear();
    for (const auto& x : f) {
      if (!x.is_string()) throw ConfigError("'formats' entries must be strings");
      const auto s = x.get<std::string>();
      if (s != "csv" && s != "json" && s != "svg") throw ConfigError("unknown format '" + s + "'");
      c.formats.insert(s);
    }
  }
  if (j.contains("inversion")) {
    const json& inv = j["inversion"];
    if (!inv.is_object()) throw ConfigError("'inversion' must be an object");
    if (inv.contains("terms")) {
      if (!inv["terms"].is_number_integer()) throw ConfigError("inversion.terms must be an integer");
      c.inversion_terms = inv["terms"].get<int>();
      if (c.inversion_terms < 9 || c.inversion_terms % 2 == 0)
        throw ConfigError("inversion.terms must be odd and >= 9");
    }
    if (inv.contains("tolerance")) {
      c.inversion_tolerance = get_number(inv, "tolerance");
      if (!(c.inversion_tolerance > 0.0)) throw ConfigError("inversion.tolerance must be > 0");
    }
  }
  if (j.contains("empirical_time")) {
    c.empirical_time = get_number(j, "empirical_time");
    if (c.empirical_time < 0.0) throw ConfigError("'empirical_time' must be >= 0");
  }
  if (j.contains("independent_pair")) c.independent_pair = get_as<bool>(j, "independent_pair");

  // Command-specific requirements.
  const bool alternating = c.construction != Construction::Standard;
  switch (c.command) {
    case Command::Simulate:
      if (c.lambdas.empty()) throw ConfigError("simulate needs 'lambda' or 'lambdas'");
      if ((c.epochs > 0) == (c.horizon > 0.0)) throw ConfigError("simulate needs exactly one of 'epochs' or 'horizon'");
      if (c.construction == Construction::Standard && c.lambdas.size() != 1)
        throw ConfigError("the standard construction takes a single 'lambda'");
      break;
    case Command::Generator:
      if (c.lambdas.size() != 1) throw ConfigError("generator needs a single 'lambda'");
      if (c.independent_pair && alternating) throw ConfigError("'independent_pair' applies to the standard construction");
      if (c.independent_pair && c.empirical_time > 0.0)
        throw ConfigError("no empirical estimate for the independent pair");
      break;
    case Command::Correlation:
      if (!alternating) throw ConfigError("correlation needs construction exp-alt or map-alt");
      if (c.t_grid.empty()) throw ConfigError("correlation needs 't_grid'");
      if (c.replications < 1000) throw ConfigError("correlation needs 'replications' >= 1000");
      break;
    case Command::Laplace:
      if (!alternating) throw ConfigError("laplace needs construction exp-alt or map-alt");
      if (c.q_grid.empty()) throw ConfigError("laplace needs 'q_grid'");
      break;
    case Command::Converge:
      if (c.lambdas.empty()) throw ConfigError("converge needs 'lambdas'");
      if (c.replications == 0) throw ConfigError("converge needs 'replications' >= 1");
      if (c.horizon == 0.0) c.horizon = 1.0;
      break;
  }
  if (c.command == Command::Converge && !j.contains("horizon")) j["horizon"] = c.horizon;
  if (!j.contains("replications")) j["replications"] = c.replications;
  j.erase("workers");  // outputs do not depend on it; keep it out of the echo
  c.echo = j.dump(2);
  return c;
}

namespace {

std::string num(double x) { return format_double(x); }

std::string matrix_text(const Matrix& m) {
  std::string s = "[";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    s += "[";
    for (std::size_t k = 0; k < m.cols(); ++k) s += (k ? " " : "") + num(m(i, k));
    s += "]";
  }
  return s + "]";
}

// Driver parameters as one CSV-safe metadata cell.
std::string params_text(const ExperimentConfig& c) {
  std::string s;
  if (c.exp) {
    s = "alpha=" + num(c.exp->alpha()) + ";beta=" + num(c.exp->beta()) + ";start=" +
        (c.exp->start() == DriverStart::Synchronized ? "synchronized" : "desynchronized");
  } else if (c.map) {
    std::string b = "[";
    for (std::size_t i = 0; i < c.map->b.size(); ++i) b += (i ? " " : "") + num(c.map->b[i]);
    s = "b=" + b + "];C=" + matrix_text(c.map->c) + ";D=" + matrix_text(c.map->d) +
        ";gamma=" + num(c.map_gamma);
  }
  std::string l;
  for (std::size_t i = 0; i < c.lambdas.size(); ++i) l += (i ? " " : "") + num(c.lambdas[i]);
  if (!l.empty()) s += (s.empty() ? "" : ";") + std::string("lambdas=[") + l + "]";
  return s;
}

double finite(double x, const char* what) {
  if (!std::isfinite(x)) throw RangeViolation(std::string("non-finite ") + what);
  return x;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (double x : m.row(i)) r.push_back(finite(x, "matrix entry"));
    rows.push_back(r);
  }
  return rows;
}

json vector_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(finite(x, "value"));
  return a;
}

struct Output {
  std::optional<CsvTable> csv;
  json doc = json::object();
  std::string svg;
};

std::vector<CsvTable::Cell> with_meta(std::vector<CsvTable::Cell> row, const ExperimentConfig& c) {
  row.emplace_back(static_cast<long long>(c.seed));
  row.emplace_back(std::string(construction_name(c.construction)));
  row.emplace_back(params_text(c));
  return row;
}

std::vector<std::string> with_meta_columns(std::vector<std::string> cols) {
  cols.insert(cols.end(), {"seed", "construction", "params"});
  return cols;
}

json coupling_json(const CoupledPair& p, double horizon) {
  const auto r = coupling_diagnostics(p, horizon);
  return {{"lambda", p.lambda},
          {"skeleton", {{"theta", vector_json(p.skeleton.epochs)},
                        {"C", vector_json(p.skeleton.values)},
                        {"M", vector_json(p.skeleton.minima)}}},
          {"chi", vector_json(p.chi)},
          {"diagnostics", {{"misalignment", r.misalignment},
                           {"value_residual", r.value_residual},
                           {"minimum_residual", r.minimum_residual},
                           {"compared", r.compared}}}};
}

Output do_simulate(const ExperimentConfig& c) {
  Output out;
  const RandomStream rs(c.seed);
  ChartSpec chart{"Simulated fluid paths", "t", "level"};
  if (c.construction == Construction::Standard) {
    const double lambda = c.lambdas[0];
    const auto p = c.epochs > 0 ? wh_couple(lambda, c.epochs, rs) : wh_couple_horizon(lambda, c.horizon, rs);
    CsvTable t(with_meta_columns({"t", "F", "J"}));
    const auto bp = p.fluid.breakpoints();
    Series f{"F", {}, {}};
    for (std::size_t k = 0; k < bp.size(); ++k) {
      const int state = p.phase.state_at(std::min(bp[k], p.phase.horizon()));
      t.add_row(with_meta({bp[k], p.fluid.levels()[k], static_cast<long long>(phase::index_sign(state))}, c));
      f.x.push_back(bp[k]);
      f.y.push_back(p.fluid.levels()[k]);
    }
    out.csv = std::move(t);
    out.doc = coupling_json(p, c.epochs > 0 ? std::numeric_limits<double>::infinity() : c.horizon);
    Series sk{"skeleton C_k at chi_k", p.chi, p.skeleton.values, true};
    out.svg = svg_line_chart(chart, {f, sk});
    return out;
  }

  const BivariateFlipFlopPath* path = nullptr;
  const CoupledPair* coupled = nullptr;
  std::optional<ExpAltRealization> er;
  std::optional<MapAltRealization> mr;
  if (c.construction == Construction::ExpAlternating) {
    er = simulate_exp_alternating(*c.exp, c.lambdas, c.epochs, c.horizon, rs);
    path = &er->path;
    coupled = &er->coupled;
  } else {
    mr = simulate_map_alternating(*c.map, c.map_gamma, c.lambdas, c.epochs, c.horizon, rs);
    path = &mr->path;
    coupled = &mr->coupled;
  }
  CsvTable t(with_meta_columns({"t", "F1", "F2", "J1", "J2", "sync", "env"}));
  const auto bp = path->fluid1.breakpoints();
  const int block = static_cast<int>(path->env_states);
  Series f1{"F1", {}, {}}, f2{"F2", {}, {}};
  for (std::size_t k = 0; k < bp.size(); ++k) {
    const int s = path->phase.state_at(std::min(bp[k], path->phase.horizon()));
    const int pair = s / block;
    const int j1 = phase::pair_first(pair), j2 = phase::pair_second(pair);
    t.add_row(with_meta({bp[k], path->fluid1.levels()[k], path->fluid2.levels()[k],
                         static_cast<long long>(j1), static_cast<long long>(j2),
                         static_cast<long long>(j1 == j2 ? 1 : 0), static_cast<long long>(s % block)},
                        c));
    f1.x.push_back(bp[k]);
    f1.y.push_back(path->fluid1.levels()[k]);
    f2.x.push_back(bp[k]);
    f2.y.push_back(path->fluid2.levels()[k]);
  }
  out.csv = std::move(t);
  out.doc = coupling_json(*coupled, c.epochs > 0 ? std::numeric_limits<double>::infinity() : c.horizon);
  double bstar_residual = 0.0;
  for (std::size_t k = 0; k < path->bstar.size(); ++k)
    bstar_residual = std::max(bstar_residual, std::abs(eval_fluid(path->fluid2, path->chi[k]) - path->bstar[k]));
  out.doc["bstar"] = vector_json(path->bstar);
  out.doc["diagnostics"]["bstar_residual"] = bstar_residual;
  std::vector<double> s_epochs = path->schedule.s_epochs;
  json sch = {{"level", path->schedule.level},
              {"ell", path->schedule.ell},
              {"nu", path->schedule.nu},
              {"s_epochs", vector_json(s_epochs)}};
  out.doc["schedule"] = sch;
  out.doc["rates"] = vector_json(er ? er->family.rates : mr->family.rates);
  out.svg = svg_line_chart(chart, {f1, f2});
  return out;
}

Output do_generator(const ExperimentConfig& c) {
  Output out;
  const double lambda = c.lambdas[0];
  GeneratorMatrix g;
  Vector initial;
  if (c.construction == Construction::Standard) {
    g = c.independent_pair ? build_independent_bivariate_generator(lambda) : build_standard_generator(lambda);
    initial.assign(g.q.rows(), 0.0);
    initial.back() = 1.0;  // phases start at -1
  } else if (c.construction == Construction::ExpAlternating) {
    g = build_exp_alt_generator(lambda, *c.exp);
    initial = {0, 0, 0, 0};
    initial[c.exp->start() == DriverStart::Synchronized ? 3 : 2] = 1.0;
  } else {
    g = build_map_alt_generator(lambda, *c.map);
    initial = map_alt_initial(*c.map);
  }
  out.doc = {{"states", g.states}, {"matrix", matrix_json(g.q)}, {"initial", vector_json(initial)}};

  std::optional<EmpiricalGenerator> emp;
  if (c.empirical_time > 0.0) {
    const RandomStream root(c.seed);
    const std::vector<double> lambdas{lambda};
    const auto count = static_cast<std::size_t>(std::ceil(lambda * c.empirical_time / 2.0)) + 1;
    std::vector<PhasePath> paths;
    double total = 0.0;
    for (std::uint64_t r = 0; total < c.empirical_time; ++r) {
      const RandomStream s = root.substream(r);
      if (c.construction == Construction::Standard)
        paths.push_back(wh_couple(lambda, count, s).phase);
      else if (c.construction == Construction::ExpAlternating)
        paths.push_back(simulate_exp_alternating(*c.exp, lambdas, count, 0.0, s).path.phase);
      else
        paths.push_back(simulate_map_alternating(*c.map, c.map_gamma, lambdas, count, 0.0, s).path.phase);
      total += paths.back().horizon();
    }
    emp = empirical_generator(paths, g.q.rows());
    const auto check = compare_generator(*emp, g.q);
    out.doc["empirical"] = {{"total_time", total},
                            {"paths", paths.size()},
                            {"estimate", matrix_json(emp->estimate)},
                            {"stderr", matrix_json(emp->standard_error)},
                            {"counts", matrix_json(emp->counts)},
                            {"holding", vector_json(emp->holding)},
                            {"observed", emp->observed},
                            {"worst_z", std::isfinite(check.worst_z) ? json(check.worst_z) : json("inf")},
                            {"band_violations", check.band_violations},
                            {"zero_block_violations", check.zero_block_violations},
                            {"within_3se", check.passed()}};
  }

  std::vector<std::string> cols{"from", "to", "rate"};
  if (emp) cols.insert(cols.end(), {"empirical", "empirical_stderr", "transitions", "observed"});
  CsvTable t(with_meta_columns(cols));
  for (std::size_t i = 0; i < g.q.rows(); ++i)
    for (std::size_t k = 0; k < g.q.cols(); ++k) {
      std::vector<CsvTable::Cell> row{g.states[i], g.states[k], g.q(i, k)};
      if (emp) {
        row.emplace_back(emp->estimate(i, k));
        row.emplace_back(emp->standard_error(i, k));
        row.emplace_back(static_cast<long long>(emp->counts(i, k)));
        row.emplace_back(static_cast<long long>(emp->observed[i] ? 1 : 0));
      }
      t.add_row(with_meta(std::move(row), c));
    }
  out.csv = std::move(t);
  return out;
}

Driver driver_of(const ExperimentConfig& c) {
  if (c.exp) return *c.exp;
  return *c.map;
}

double analytic_corr(const ExperimentConfig& c, double t) {
  return c.exp ? corr_exp(*c.exp, t) : corr_map(*c.map, t, c.inversion_terms, c.inversion_tolerance);
}

Output do_correlation(const ExperimentConfig& c) {
  Output out;
  const RandomStream root = RandomStream(c.seed).substream("correlation");
  const Driver d = driver_of(c);
  CsvTable t(with_meta_columns({"t", "analytic", "mc_estimate", "mc_stderr", "z", "replications"}));
  json rows = json::array();
  Series mc{"Monte Carlo", {}, {}, true};
  for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
    const double tt = c.t_grid[i];
    const double a = analytic_corr(c, tt);
    const auto e = mc_correlation(d, tt, c.replications, root.substream(static_cast<std::uint64_t>(i)), c.workers);
    const double z = e.std_error > 0.0 ? (e.mean - a) / e.std_error : 0.0;
    t.add_row(with_meta({tt, a, e.mean, e.std_error, z, static_cast<long long>(e.replications)}, c));
    rows.push_back({{"t", tt}, {"analytic", a}, {"mc_estimate", e.mean}, {"mc_stderr", e.std_error},
                    {"z", z}, {"within_3se", std::abs(z) <= 3.0}});
    mc.x.push_back(tt);
    mc.y.push_back(e.mean);
  }
  out.csv = std::move(t);
  out.doc["rows"] = rows;

  if (c.exp && c.exp->start() == DriverStart::Synchronized) {
    json pm = json::array();
    const RandomStream pm_root = RandomStream(c.seed).substream("point-mass");
    for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
      const auto r = sync_point_mass(c.exp->alpha(), c.t_grid[i], c.replications,
                                     pm_root.substream(static_cast<std::uint64_t>(i)));
      pm.push_back({{"t", c.t_grid[i]}, {"estimate", r.estimate.mean}, {"stderr", r.estimate.std_error},
                    {"expected", r.expected}, {"underpowered", r.underpowered}});
    }
    out.doc["sync_point_mass"] = pm;
  }

  const auto [lo, hi] = std::minmax_element(c.t_grid.begin(), c.t_grid.end());
  Series curve{"analytic", {}, {}};
  const int n = *lo == *hi ? 1 : 200;
  for (int k = 0; k < n; ++k) {
    const double tt = n == 1 ? *lo : *lo + (*hi - *lo) * k / (n - 1);
    curve.x.push_back(tt);
    curve.y.push_back(analytic_corr(c, tt));
  }
  out.svg = svg_line_chart({"Correlation E[B(t)B*(t)]/t", "t", "correlation"}, {curve, mc});
  return out;
}

MapParams laplace_map(const ExperimentConfig& c) {
  if (c.map) return *c.map;
  MapParams m = exponential_map(c.exp->alpha(), c.exp->beta());
  if (c.exp->start() == DriverStart::Desynchronized) m.b = {0.0, 1.0};
  return m;
}

Output do_laplace(const ExperimentConfig& c) {
  Output out;
  const MapParams m = laplace_map(c);
  CsvTable t(with_meta_columns({"q", "transform"}));
  json rows = json::array();
  Series s{"transform", {}, {}};
  for (double q : c.q_grid) {
    const double v = finite(cov_laplace(m, q), "transform value");
    t.add_row(with_meta({q, v}, c));
    rows.push_back({{"q", q}, {"transform", v}});
    s.x.push_back(q);
    s.y.push_back(v);
  }
  out.csv = std::move(t);
  out.doc["transform"] = rows;
  if (!c.t_grid.empty()) {
    json td = json::array();
    for (double tt : c.t_grid) {
      const double cov = cov_time_domain(m, tt, c.inversion_terms, c.inversion_tolerance);
      td.push_back({{"t", tt}, {"covariance", cov}, {"correlation", cov / tt}});
    }
    out.doc["time_domain"] = td;
  }
  auto order = s;
  std::vector<std::size_t> idx(s.x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
  for (std::size_t i = 0; i < idx.size(); ++i) {
    order.x[i] = s.x[idx[i]];
    order.y[i] = s.y[idx[i]];
  }
  out.svg = svg_line_chart({"Laplace transform of E[B(t)B*(t)]", "q", "transform", true, false}, {order});
  return out;
}

Output do_converge(const ExperimentConfig& c) {
  Output out;
  SweepSpec spec;
  spec.construction = c.construction;
  spec.lambdas = c.lambdas;
  spec.horizon = c.horizon;
  spec.replications = c.replications;
  spec.exp_params = c.exp;
  spec.map_params = c.map;
  spec.map_gamma = c.map_gamma;
  const auto r = convergence_sweep(spec, RandomStream(c.seed), c.workers);
  CsvTable t(with_meta_columns({"lambda", "median_misalignment", "p90_misalignment", "value_residual",
                                "minimum_residual", "bstar_residual", "replications", "horizon"}));
  json rows = json::array();
  Series med{"median", {}, {}}, p90{"90th percentile", {}, {}};
  for (const auto& row : r.rows) {
    t.add_row(with_meta({row.lambda, row.median_misalignment, row.p90_misalignment, row.value_residual,
                         row.minimum_residual, row.bstar_residual,
                         static_cast<long long>(c.replications), c.horizon},
                        c));
    rows.push_back({{"lambda", row.lambda},
                    {"median_misalignment", row.median_misalignment},
                    {"p90_misalignment", row.p90_misalignment},
                    {"value_residual", row.value_residual},
                    {"minimum_residual", row.minimum_residual},
                    {"bstar_residual", row.bstar_residual}});
    med.x.push_back(row.lambda);
    med.y.push_back(row.median_misalignment);
    p90.x.push_back(row.lambda);
    p90.y.push_back(row.p90_misalignment);
  }
  out.csv = std::move(t);
  bool decreasing = true;
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    decreasing = decreasing && r.rows[i].median_misalignment < r.rows[i - 1].median_misalignment;
  out.doc = {{"rows", rows},
             {"medians_strictly_decreasing", decreasing},
             {"slope", {{"estimate", finite(r.slope, "slope")},
                        {"stderr", finite(r.slope_stderr, "slope stderr")},
                        {"ci95", {r.slope_ci_low, r.slope_ci_high}}}}};
  out.svg = svg_line_chart({"Epoch misalignment max_k |theta_k - chi_k|", "lambda", "misalignment", true, true},
                           {med, p90});
  return out;
}

}  // namespace

std::vector<std::string> run(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  Output out;
  switch (config.command) {
    case Command::Simulate: out = do_simulate(config); break;
    case Command::Generator: out = do_generator(config); break;
    case Command::Correlation: out = do_correlation(config); break;
    case Command::Laplace: out = do_laplace(config); break;
    case Command::Converge: out = do_converge(config); break;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("IoError", "cannot create output directory " + out_dir.string() + ": " + ec.message());

  const std::string stem(command_name(config.command));
  std::vector<std::string> files;
  if (config.formats.count("csv") && out.csv) {
    write_text_file((out_dir / (stem + ".csv")).string(), out.csv->str());
    files.push_back(stem + ".csv");
  }
  if (config.formats.count("json")) {
    json doc = out.doc;
    doc["command"] = stem;
    doc["seed"] = config.seed;
    doc["construction"] = construction_name(config.construction);
    doc["params"] = params_text(config);
    write_text_file((out_dir / (stem + ".json")).string(), doc.dump(2) + "\n");
    files.push_back(stem + ".json");
  }
  if (config.formats.count("svg") && !out.svg.empty()) {
    write_text_file((out_dir / (stem + ".svg")).string(), out.svg);
    files.push_back(stem + ".svg");
  }
  const json manifest = {{"tool", "altbm"},
                         {"version", ALTBM_VERSION},
                         {"command", stem},
                         {"config", json::parse(config.echo)},
                         {"files", files}};
  write_text_file((out_dir / "manifest.json").string(), manifest.dump(2) + "\n");
  files.push_back("manifest.json");
  return files;
}

namespace {

int report(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled flip-flop constructions of alternating Brownian motions", "altbm"};
  app.set_version_flag("--version", ALTBM_VERSION);
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::vector<std::string> overrides;
  app.add_option("command", command, "simulate | generator | correlation | laplace | converge")
      ->required()
      ->check(CLI::IsMember({"simulate", "generator", "correlation", "laplace", "converge"}));
  app.add_option("--config", config_path, "JSON experiment configuration")->required();
  app.add_option("--seed", seed, "override the configured seed");
  app.add_option("--out", out_dir, "output directory (default: current directory)");
  app.add_option("--workers", workers, "worker threads (0 = all available)");
  app.add_option("--set", overrides, "override a top-level config field, key=value (value read as JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("InvalidArguments", e.what(), 1);
  }

  try {
    std::ifstream f(config_path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file " + config_path);
    std::stringstream buf;
    buf << f.rdbuf();
    if (seed) overrides.push_back("seed=" + std::to_string(*seed));
    if (workers) overrides.push_back("workers=" + std::to_string(*workers));
    const auto config = parse_config(buf.str(), command, overrides);
    for (const auto& file : run(config, out_dir)) std::cout << (std::filesystem::path(out_dir) / file).string() << "\n";
    return 0;
  } catch (const InvalidArgument& e) {
    return report(e.kind(), e.what(), 1);
  } catch (const NumericalError& e) {
    return report(e.kind(), e.what(), 2);
  } catch (const Error& e) {
    return report(e.kind(), e.what(), 3);
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), 3);
  }
}

}  // namespace altbm::cli
