#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "landau/cli.hpp"
#include "landau/many_body.hpp"

using namespace landau;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("landau_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(LANDAU_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

RunConfig random_config(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> small(1, 9);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  RunConfig c;
  c.torus = {u(rng), small(rng), u(rng), small(rng) - 1, small(rng)};
  c.grid = 1 << small(rng);
  c.n_max = small(rng);
  c.truncation_tol = std::pow(10.0, -small(rng));
  c.potential = PotentialSpec::fourier({{1, 0, cplx(u(rng), -u(rng))}, {-1, 0, cplx(u(rng), u(rng))}});
  c.interaction = PotentialSpec::gaussian_periodic(u(rng), u(rng));
  c.lambda = u(rng);
  c.qll_tol = u(rng) * 1e-9;
  c.ed.sweep = {{small(rng), small(rng)}};
  c.ed.bias = rng() & 1;
  c.ed.budget = std::size_t(rng() % 1000000);
  c.projector_sweep = {small(rng), small(rng)};
  c.verify_criteria = {small(rng)};
  c.svg = rng() & 1;
  return c;
}

}  // namespace

TEST_CASE("number formatting: 17 significant digits, locale free") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-1.0 / 3.0) == "-0.33333333333333331");
  CHECK(format_number(-2.5e-300) == "-2.5e-300");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-HUGE_VAL) == "-inf");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int t = 0; t < 1000; ++t) {
    const double v = u(rng) * std::pow(10.0, double(int(rng() % 40)) - 20);
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("property: config round trip") {
  CHECK(to_json(config_from_json(to_json(RunConfig{}))) == to_json(RunConfig{}));
  CHECK(to_json(load_config("", {})) == to_json(RunConfig{}));
  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    const json j = to_json(random_config(rng));
    const json again = to_json(config_from_json(j));
    CHECK(again == j);
    CHECK(again.dump() == j.dump());
    CHECK(to_json(load_config(j.dump(2), {})) == j);
  }
}

TEST_CASE("config: strict keys and types, precedence flags > file > defaults") {
  CHECK_THROWS_AS(load_config(R"({"torus": {"D": 4}})", {}), ParseError);
  CHECK_THROWS_AS(load_config(R"({"gird": 64})", {}), ParseError);
  CHECK_THROWS_AS(load_config(R"({"grid": 64.5})", {}), ParseError);
  CHECK_THROWS_AS(load_config(R"({"grid": "64"})", {}), ParseError);
  CHECK_THROWS_AS(load_config(R"({"svg": 1})", {}), ParseError);
  CHECK_THROWS_AS(load_config(R"({"potential": {"family": "square"}})", {}), ParseError);
  CHECK_THROWS_AS(load_config(R"({"ed": {"sweep": [[2, 3, 4]]}})", {}), ParseError);
  CHECK_THROWS_AS(load_config("[1, 2]", {}), ParseError);
  CHECK_THROWS_AS(load_config("{", {}), ParseError);
  CHECK_THROWS_AS(load_config("", {"grid"}), ParseError);
  CHECK_THROWS_AS(load_config("", {"grid..x=1"}), ParseError);
  CHECK_THROWS_AS(load_config("", {"nope.x=1"}), ParseError);

  const RunConfig file = load_config(R"({"grid": 32, "torus": {"d": 6, "N": 9}})", {});
  CHECK(file.grid == 32);
  CHECK(file.torus.d == 6);
  CHECK(file.torus.hbar == 1.0);  // default kept
  const RunConfig flags = load_config(R"({"grid": 32, "torus": {"d": 6, "N": 9}})",
                                      {"grid=128", "torus.N=8", "potential.family=zero", "ed.sweep=[[4,6]]"});
  CHECK(flags.grid == 128);
  CHECK(flags.torus.N == 8);
  CHECK(flags.torus.d == 6);
  CHECK(flags.potential.family == PotentialFamily::zero);
  CHECK(flags.ed.sweep == std::vector<std::pair<int, int>>{{4, 6}});
  // later flags win
  CHECK(load_config("", {"grid=16", "grid=8"}).grid == 8);
  json doc = json::object();
  apply_override(doc, "a.b=hello world");
  apply_override(doc, "a.c=[1,2]");
  CHECK(doc["a"]["b"] == "hello world");
  CHECK(doc["a"]["c"] == json::array({1, 2}));
}

TEST_CASE("csv and svg emitters") {
  CsvTable t{{"a", "b"}, {}};
  t.add({"1", format_number(0.5)});
  CHECK(t.str() == "a,b\n1,0.5\n");
  for (int n : {4, 16}) {
    RealField f(make_grid(n, 2.0));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) f(i, j) = i - 0.5 * j;
    const std::string s = svg_heatmap(f, "test");
    CHECK(s.find("viewBox=\"0 0 " + std::to_string(n) + " " + std::to_string(n) + "\"") != std::string::npos);
    std::size_t rects = 0, pos = 0;
    while ((pos = s.find("<rect", pos)) != std::string::npos) ++rects, ++pos;
    CHECK(rects == std::size_t(n) * n);
    CHECK(s == svg_heatmap(f, "test"));
  }
}

TEST_CASE("driver: exit codes and no artifacts on malformed input") {
  const fs::path dir = scratch("codes");
  fs::create_directories(dir);
  spit(dir / "bad.json", R"({"torus": {"d": 4,)");
  spit(dir / "unknown.json", R"({"qll": {"tolerance": 1e-9}})");
  CHECK(run("qll --config " + (dir / "bad.json").string() + " --out " + (dir / "o1").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "o1"));
  CHECK(run("qll --config " + (dir / "unknown.json").string() + " --out " + (dir / "o2").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "o2"));
  CHECK(run("qll --set grid=abc --out " + (dir / "o3").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "o3"));
  CHECK(run("qll --out " + (dir / "o4").string() + " --config " + (dir / "missing.json").string()) == 2);
  CHECK(run("frobnicate --out " + (dir / "o5").string()) == 2);
  CHECK(run("qll") == 2);
  CHECK(run("qll --set torus.q=3 --out " + (dir / "o6").string()) == 3);
  CHECK(run("basis --set grid=12 --out " + (dir / "o7").string()) == 3);
  CHECK(run("qll --set interaction.sigma=-1 --out " + (dir / "o8").string()) == 3);
  CHECK(run("qll --set qll.max_iterations=2 --set potential.amplitude=3 --out " + (dir / "o9").string()) == 4);
  fs::remove_all(dir);
}

TEST_CASE("driver: qll with V = 0 reports the uniform minimizer; runs are byte-stable") {
  const fs::path a = scratch("qll_a"), b = scratch("qll_b");
  const std::string args = "qll --set potential.family=zero --set grid=32 --out ";
  REQUIRE(run(args + a.string()) == 0);
  REQUIRE(run("qll --set grid=32 --set potential.family=zero --out " + b.string()) == 0);
  for (const char* f : {"qll_density.csv", "qll_log.csv", "summary.json", "qll_density.svg"}) {
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const json s = json::parse(slurp(a / "summary.json"));
  CHECK(s["subcommand"] == "qll");
  CHECK(s["pass"] == true);
  CHECK(s["config"]["grid"] == 32);
  bool found = false;
  for (const auto& c : s["checks"]) {
    // schema: every check carries value, relation, tolerance and verdict
    CHECK(c["value"].is_number());
    CHECK(c["tolerance"].is_number());
    CHECK(c["relation"].is_string());
    CHECK(c["pass"].is_boolean());
    if (c["name"] == "max |rho* - rho0|") {
      found = true;
      CHECK(c["value"].get<double>() <= 1e-6);
    }
  }
  CHECK(found);
  for (const auto& [k, v] : s["results"].items()) {
    CHECK(v["value"].is_number());
    CHECK(v["tolerance"].is_number());
  }
  // header plus one row per grid cell
  const std::string csv = slurp(a / "qll_density.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 32 * 32);
  CHECK(csv.rfind("i,j,x,y,V,rho,gradient\n", 0) == 0);
  // the echoed config reproduces the run
  spit(a / "echo.json", s["config"].dump());
  const fs::path c = scratch("qll_c");
  REQUIRE(run("qll --config " + (a / "echo.json").string() + " --out " + c.string()) == 0);
  CHECK(slurp(c / "qll_density.csv") == slurp(a / "qll_density.csv"));
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("driver: thread cap does not change the output") {
  const fs::path a = scratch("thr_a"), b = scratch("thr_b");
  const std::string args = "ed --set 'ed.sweep=[[3,4]]' --set ed.n_max=1 --set grid=32 --out ";
  REQUIRE(std::system(("LANDAU_TORUS_THREADS=1 " + std::string(LANDAU_CLI_PATH) + " " + args + a.string() +
                       " > /dev/null").c_str()) == 0);
  REQUIRE(std::system(("LANDAU_TORUS_THREADS=4 " + std::string(LANDAU_CLI_PATH) + " " + args + b.string() +
                       " > /dev/null").c_str()) == 0);
  for (const char* f : {"ed.csv", "ed_levels.csv", "summary.json", "gs_d3_N4.bin"}) CHECK(slurp(a / f) == slurp(b / f));
  // the saved ground state reloads, normalized, with the documented header
  const FockVector psi = load_ground_state((a / "gs_d3_N4.bin").string(), 3, 1);
  CHECK(psi.coeffs.size() == 15);
  CHECK(std::abs(psi.coeffs.norm() - 1.0) <= 1e-12);
  CHECK(slurp(a / "gs_d3_N4.bin").substr(0, 4) == "LTGS");
  for (const auto& p : {a, b}) fs::remove_all(p);
}

TEST_CASE("driver: other subcommands") {
  const fs::path dir = scratch("subs");
  CHECK(run("basis --set n_max=1 --set grid=64 --out " + (dir / "basis").string()) == 0);
  CHECK(fs::exists(dir / "basis" / "orbitals.csv"));
  CHECK(run("projector --set 'projector.sweep=[8,16]' --out " + (dir / "proj").string()) == 0);
  CHECK(fs::exists(dir / "proj" / "diagonal_deviation.svg"));
  CHECK(run("husimi --set 'husimi.sweep=[4,8]' --set svg=false --out " + (dir / "hus").string()) == 0);
  CHECK(fs::exists(dir / "hus" / "husimi.csv"));
  CHECK_FALSE(fs::exists(dir / "hus" / "husimi_level0.svg"));
  CHECK(run("verify --set 'verify.criteria=[2,3,6]' --out " + (dir / "ver").string()) == 0);
  const json s = json::parse(slurp(dir / "ver" / "summary.json"));
  CHECK(s["criteria"].size() == 3);
  for (const auto& c : s["criteria"]) CHECK(c["pass"] == true);
  CHECK(run("verify --set 'verify.criteria=[12]' --out " + (dir / "ver2").string()) == 3);
  fs::remove_all(dir);
}

TEST_CASE("driver: the unattainable criterion is reported but not counted") {
  const fs::path dir = scratch("ver4");
  CHECK(run("verify --set 'verify.criteria=[4]' --out " + dir.string()) == 0);
  const json s = json::parse(slurp(dir / "summary.json"));
  REQUIRE(s["criteria"].size() == 1);
  CHECK(s["criteria"][0]["unattainable"] == true);
  CHECK(s["criteria"][0]["pass"] == false);
  const std::string csv = slurp(dir / "verify.csv");
  CHECK(csv.find("\"log-log slope of deviation vs l_b\"") != std::string::npos);
  fs::remove_all(dir);
}
