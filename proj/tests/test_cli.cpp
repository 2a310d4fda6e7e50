#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "altbm/cli.hpp"
#include "altbm/errors.hpp"
#include "json.hpp"

using namespace altbm;
using namespace altbm::cli;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("altbm_cli_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse_config("{", "laplace"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]", "laplace"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"unknown": 1})", "laplace"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"command": "simulate"})", "laplace"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"construction": "exp-alt", "alpha": 1, "beta": 1})", "laplace"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"construction": "exp-alt", "alpha": 1, "beta": 1, "q_grid": [0]})", "laplace"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"construction": "exp-alt", "alpha": 1, "beta": 1, "t_grid": [1],
                                   "replications": 999})", "correlation"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"lambdas": [4, 2]})", "converge"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"lambda": 4, "epochs": 3, "horizon": 1})", "simulate"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"construction": "map-alt", "map": {"b": [1], "C": [[-1]], "D": [[2]]},
                                   "q_grid": [1]})", "laplace"),
                  InvalidMap);
  CHECK_THROWS_AS(parse_config(R"({"construction": "exp-alt", "alpha": -1, "beta": 1, "q_grid": [1]})", "laplace"),
                  InvalidArgument);
}

TEST_CASE("overrides replace top-level fields") {
  const auto c = parse_config(R"({"lambda": 4, "epochs": 3, "seed": 1})", "simulate",
                              {"seed=99", "lambda=8", "formats=[\"csv\"]"});
  CHECK(c.seed == 99);
  CHECK(c.lambdas == std::vector<double>{8.0});
  CHECK(c.formats == std::set<std::string>{"csv"});
  CHECK_THROWS_AS(parse_config("{}", "simulate", {"noequals"}), ConfigError);
}

TEST_CASE("laplace output for the exponential driver") {
  const auto c = parse_config(R"({"construction": "exp-alt", "alpha": 1, "beta": 1, "q_grid": [1, 2]})", "laplace");
  const auto dir = scratch("laplace");
  const auto files = run(c, dir);
  CHECK(files.back() == "manifest.json");
  const auto doc = json::parse(slurp(dir / "laplace.json"));
  // alpha = beta = 1: transform 1 / (q (2 + q)).
  CHECK(doc["transform"][0]["transform"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(doc["transform"][1]["transform"].get<double>() == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
  const auto manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["tool"] == "altbm");
  CHECK(manifest["config"]["seed"] == 1);
  CHECK(manifest["files"].size() == files.size() - 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("generator output matches the library matrix") {
  const auto c = parse_config(R"({"lambda": 10})", "generator");
  const auto dir = scratch("generator");
  run(c, dir);
  const auto doc = json::parse(slurp(dir / "generator.json"));
  CHECK(doc["matrix"] == json::parse("[[-10.0, 10.0], [10.0, -10.0]]"));
  CHECK(slurp(dir / "generator.csv").find("1,-1,10,") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reruns are byte-identical and ignore the worker count") {
  const std::string cfg = R"({"construction": "exp-alt", "alpha": 1, "beta": 2, "t_grid": [0.5, 1],
                              "replications": 1000, "seed": 5})";
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  run(parse_config(cfg, "correlation", {"workers=1"}), a);
  run(parse_config(cfg, "correlation", {"workers=3"}), b);
  for (const auto& f : {"correlation.csv", "correlation.json", "correlation.svg", "manifest.json"})
    CHECK(slurp(a / f) == slurp(b / f));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("simulate writes one row per breakpoint with consistent signs") {
  const auto c = parse_config(R"({"construction": "exp-alt", "alpha": 1, "beta": 1, "lambdas": [20],
                                  "epochs": 30, "formats": ["json"]})", "simulate");
  const auto dir = scratch("simulate");
  const auto files = run(c, dir);
  CHECK(files == std::vector<std::string>{"simulate.json", "manifest.json"});
  const auto doc = json::parse(slurp(dir / "simulate.json"));
  CHECK(doc["diagnostics"]["value_residual"].get<double>() < 1e-12);
  CHECK(doc["diagnostics"]["bstar_residual"].get<double>() < 1e-12);
  std::filesystem::remove_all(dir);
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("main");
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "bad.json") << R"({"construction": "exp-alt", "alpha": 1, "beta": 2, "lambda": 1})";
    std::ofstream(dir / "ok.json") << R"({"lambda": 4})";
  }
  auto call = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "altbm");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::main(static_cast<int>(argv.size()), argv.data());
  };
  CHECK(call({"generator", "--config", (dir / "bad.json").string(), "--out", (dir / "o").string()}) == 1);
  CHECK(call({"generator", "--config", (dir / "missing.json").string()}) == 1);
  CHECK(call({"nonsense", "--config", (dir / "ok.json").string()}) == 1);
  CHECK(call({"generator", "--config", (dir / "ok.json").string(), "--out", (dir / "o").string()}) == 0);
  CHECK(std::filesystem::exists(dir / "o" / "generator.csv"));
  std::filesystem::remove_all(dir);
}
