#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "apmc/harness.hpp"
#include "apmc/scenario.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace apmc;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("apmc_test_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Small periodic GT problem, cheap enough to run many times.
Scenario small_gt() {
  Scenario s = builtin_scenario("gt-riemann-diffusive");
  s.name = "small";
  s.particles = 40000;
  s.final_time = 0.01;
  s.output_times = {0.005, 0.01};
  return s;
}

/// Message of the ScenarioError raised while parsing `text`.
std::string parse_error(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

std::string builtin_text_with(const std::string& name,
                              const std::function<void(nlohmann::json&)>& edit) {
  auto j = nlohmann::json::parse(serialize_scenario(builtin_scenario(name)));
  edit(j);
  return j.dump();
}

Snapshot line_snapshot(std::size_t n, double fill) {
  const auto g = SpatialGrid::line(0.0, 1.0, n);
  Snapshot s;
  s.rho = GridFunction(g, fill);
  s.jx = GridFunction(g, 0.0);
  s.jy.grid = g;
  return s;
}

}  // namespace

TEST_CASE("built-in scenarios validate and round-trip through JSON") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const Scenario s = builtin_scenario(name);
    const std::string text = serialize_scenario(s);
    const Scenario back = parse_scenario(text);
    CHECK(back == s);
    CHECK(serialize_scenario(back) == text);
  }
}

TEST_CASE("round-trip keeps awkward doubles and 64-bit seeds exactly") {
  Scenario s = builtin_scenario("rt-slab-ingress");
  s.seed = 18446744073709551557ull;
  s.dt.c = 0.1 + 0.2;
  s.coefficients[0].eps = 1.0 / 3.0;
  s.mass_reference = 2.0 / 7.0;
  s.time_average_start = 0.07;
  CHECK(parse_scenario(serialize_scenario(s)) == s);
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK(parse_error(builtin_text_with("rt-2d", [](auto& j) { j["colour"] = "red"; })) ==
        "colour: unknown key");
  CHECK(parse_error(builtin_text_with("rt-2d", [](auto& j) { j["grid"]["nz"] = 3; })) ==
        "grid.nz: unknown key");
  CHECK(parse_error(builtin_text_with("rt-2d", [](auto& j) { j["initial"][1]["rr"] = 1; })) ==
        "initial[1].rr: unknown key");
  CHECK(parse_error(builtin_text_with("rt-two-region",
                                      [](auto& j) { j["boundary"]["left"]["value"] = 1; })) ==
        "boundary.left.value: unknown key");
  // a key that belongs to another shape is unknown here
  CHECK(parse_error(builtin_text_with("rt-2d", [](auto& j) { j["initial"][1]["x0"] = 0; })) ==
        "initial[1].x0: unknown key");
}

TEST_CASE("validation failures name the field") {
  const auto starts_with = [](const std::string& s, const std::string& prefix) {
    return s.rfind(prefix, 0) == 0;
  };
  CHECK(starts_with(parse_error("{"), "scenario: invalid JSON"));
  CHECK(starts_with(parse_error(builtin_text_with("rt-2d", [](auto& j) { j.erase("model"); })),
                    "model: missing"));
  CHECK(starts_with(
      parse_error(builtin_text_with("rt-2d", [](auto& j) { j["grid"]["nx"] = 0; })),
      "grid.nx: must be positive"));
  CHECK(starts_with(
      parse_error(builtin_text_with("rt-2d", [](auto& j) { j["grid"]["nx"] = -4; })),
      "grid.nx: must be nonnegative"));
  CHECK(starts_with(parse_error(builtin_text_with("rt-2d", [](auto& j) { j["dt"]["c"] = 0; })),
                    "dt.c: must be positive"));
  CHECK(starts_with(
      parse_error(builtin_text_with("rt-2d", [](auto& j) { j["particles"] = 0; })),
      "particles: must be positive"));
  CHECK(starts_with(
      parse_error(builtin_text_with("rt-2d", [](auto& j) { j["model"] = "rt3d"; })),
      "model: unknown value 'rt3d'"));
  CHECK(starts_with(parse_error(builtin_text_with(
                        "rt-slab-ingress", [](auto& j) { j["output_times"] = {0.05, 0.01}; })),
                    "output_times[1]: must be strictly increasing"));
  CHECK(starts_with(parse_error(builtin_text_with("rt-slab-ingress",
                                                  [](auto& j) { j["grid"]["ny"] = 4; })),
                    "grid.y0: missing"));
}

TEST_CASE("coefficient regions must cover every cell") {
  Scenario s = builtin_scenario("rt-two-region");
  s.coefficients[1].shape.x1 = 10.0;
  try {
    s.validate();
    FAIL("expected a ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).find("coefficients: cell 80") == 0);
  }
}

TEST_CASE("scheme and model combinations are checked") {
  Scenario s = builtin_scenario("gt-riemann-diffusive");
  s.scheme = Scheme::apmc_micromacro;
  CHECK_THROWS_WITH_AS(s.validate(), "scheme: apmc_micromacro is defined for rt1d and rt2d only",
                       ScenarioError);

  Scenario t = builtin_scenario("rt-2d");
  t.reference->scheme = Scheme::kinetic_ref;
  CHECK_THROWS_WITH_AS(t.validate(), "reference.scheme: kinetic_ref solves 1D problems only",
                       ScenarioError);

  Scenario u = builtin_scenario("rt-slab-ingress");
  u.reference->scheme = Scheme::apmc;
  CHECK_THROWS_AS(u.validate(), ScenarioError);

  Scenario v = builtin_scenario("rt-slab-ingress");
  v.mass_reference.reset();
  CHECK_THROWS_WITH_AS(v.validate(), "mass_reference: required when the initial data carry no mass",
                       ScenarioError);
}

TEST_CASE("standard MC is rejected unless dt resolves the free flight") {
  Scenario s = builtin_scenario("rt-slab-ingress");
  s.scheme = Scheme::standard_mc;
  try {
    s.validate();
    FAIL("expected a ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).rfind("dt: standard_mc", 0) == 0);
  }
  s.coefficients[0].eps = 0.5;
  s.dt = {DtRule::Kind::absolute, 0.5 / 80.0};
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("dt rules and region lookup") {
  const auto g = SpatialGrid::line(0.0, 2.0, 100);
  CHECK(DtRule{DtRule::Kind::absolute, 0.01}.value(g) == 0.01);
  CHECK(DtRule{DtRule::Kind::dx, 0.5}.value(g) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(DtRule{DtRule::Kind::dx2, 0.4}.value(g) == doctest::Approx(1.6e-4).epsilon(1e-14));

  const Scenario s = builtin_scenario("rt-2d");
  const auto g2 = s.build_grid();
  const auto rho = s.initial_density(g2);
  const auto coef = s.coefficient_field(g2);
  CHECK(rho[g2.index(40, 40)] == 1.0);  // centre (1.0125, 1.0125)
  CHECK(rho[g2.index(0, 0)] == 0.125);
  CHECK(coef.eps[g2.index(39, 10)] == 0.1);
  CHECK(coef.eps[g2.index(40, 10)] == 0.01);
}

TEST_CASE("compute_error: identical fields give zero") {
  const Snapshot a = line_snapshot(50, 1.3);
  CHECK(compute_error(a, a, Norm::L1, Field::rho) == 0.0);
  CHECK(compute_error(a, a, Norm::Linf, Field::j) == 0.0);
}

TEST_CASE("compute_error: constant offset on a unit domain") {
  const double delta = 0.0375;
  const Snapshot a = line_snapshot(64, 1.0);
  const Snapshot b = line_snapshot(64, 1.0 + delta);
  CHECK(compute_error(a, b, Norm::L1, Field::rho) == doctest::Approx(delta).epsilon(1e-14));
  CHECK(compute_error(a, b, Norm::Linf, Field::rho) == doctest::Approx(delta).epsilon(1e-14));
}

TEST_CASE("compute_error: random perturbation matches direct arithmetic") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Snapshot a = line_snapshot(37, 0.0), b = line_snapshot(37, 0.0);
  double l1 = 0.0, linf = 0.0;
  for (std::size_t c = 0; c < 37; ++c) {
    a.rho[c] = u(gen);
    b.rho[c] = a.rho[c] + 1e-3 * u(gen);
    l1 += std::abs(a.rho[c] - b.rho[c]) / 37.0;
    linf = std::max(linf, std::abs(a.rho[c] - b.rho[c]));
  }
  CHECK(std::abs(compute_error(a, b, Norm::L1, Field::rho) - l1) <= 1e-12);
  CHECK(std::abs(compute_error(a, b, Norm::Linf, Field::rho) - linf) <= 1e-12);
}

TEST_CASE("compute_error: 2D flux error is the vector norm") {
  const auto g = SpatialGrid::plane(0.0, 1.0, 4, 0.0, 2.0, 4);
  Snapshot a, b;
  a.rho = b.rho = GridFunction(g, 0.0);
  a.jx = a.jy = GridFunction(g, 0.0);
  b.jx = GridFunction(g, 3.0);
  b.jy = GridFunction(g, 4.0);
  CHECK(compute_error(a, b, Norm::Linf, Field::j) == doctest::Approx(5.0));
  CHECK(compute_error(a, b, Norm::L1, Field::j) == doctest::Approx(10.0));
}

TEST_CASE("compute_error: grid mismatch is an error") {
  CHECK_THROWS_AS(compute_error(line_snapshot(10, 0), line_snapshot(11, 0), Norm::L1, Field::rho),
                  std::invalid_argument);
}

TEST_CASE("snapshot CSVs round-trip exactly") {
  const auto dir = scratch_dir("csv");
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n01;

  Snapshot a = line_snapshot(13, 0.0);
  a.rho = GridFunction(SpatialGrid::line(-0.3, 1.7, 13));
  a.jx = GridFunction(a.rho.grid);
  a.jy.grid = a.rho.grid;
  for (std::size_t c = 0; c < 13; ++c) {
    a.rho[c] = n01(gen);
    a.jx[c] = n01(gen) * 1e-9;
  }
  write_snapshot_csv(dir / "a.csv", a);
  const Snapshot a2 = read_snapshot_csv(dir / "a.csv");
  CHECK(a2.rho.grid.same_shape(a.rho.grid));
  CHECK(a2.rho.values == a.rho.values);
  CHECK(a2.jx.values == a.jx.values);
  CHECK(slurp(dir / "a.csv").rfind("x,rho,j\n", 0) == 0);
  CHECK(compute_error(dir / "a.csv", dir / "a.csv", Norm::L1, Field::j) == 0.0);

  const auto g = SpatialGrid::plane(0.0, 2.0, 5, 1.0, 2.0, 3);
  Snapshot b;
  b.rho = b.jx = b.jy = GridFunction(g);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    b.rho[c] = n01(gen);
    b.jx[c] = n01(gen);
    b.jy[c] = n01(gen);
  }
  write_snapshot_csv(dir / "b.csv", b);
  const Snapshot b2 = read_snapshot_csv(dir / "b.csv");
  CHECK(b2.rho.grid.same_shape(g));
  CHECK(b2.rho.values == b.rho.values);
  CHECK(b2.jy.values == b.jy.values);
  CHECK(slurp(dir / "b.csv").rfind("x,y,rho,jx,jy\n", 0) == 0);
}

TEST_CASE("fick_flux reproduces a linear profile exactly") {
  const auto g = SpatialGrid::line(0.0, 1.0, 20);
  GridFunction rho(g);
  for (std::size_t c = 0; c < 20; ++c) rho[c] = 2.0 - 1.5 * g.center(c)[0];
  const BoundaryConditions bc{BoundarySide::dirichlet(2.0), BoundarySide::dirichlet(0.5), {}, {}};
  GridFunction jx, jy;
  fick_flux(rho, 1.0 / 3.0, std::vector<double>(20, 2.0), bc, jx, jy);
  for (double j : jx.values) CHECK(j == doctest::Approx(1.5 / 6.0).epsilon(1e-12));
}

TEST_CASE("runs are deterministic and independent of the worker count") {
  Scenario s = small_gt();
  const auto d1 = scratch_dir("w1");
  const auto d4 = scratch_dir("w4");
  s.workers = 1;
  const RunResult r1 = run_scenario(s, {d1});
  s.workers = 4;
  const RunResult r4 = run_scenario(s, {d4});
  for (const auto& f : r1.files) {
    if (f.extension() != ".csv") continue;
    CAPTURE(f);
    CHECK(slurp(f) == slurp(d4 / f.filename()));
  }
  CHECK(r1.mean[1].rho.values == r4.mean[1].rho.values);
}

TEST_CASE("replicate r reproduces on its own") {
  Scenario s = small_gt();
  s.particles = 5000;
  s.replicates = 3;
  const RunResult all = run_scenario(s);
  REQUIRE(all.replicates.size() == 3);
  const ReplicateResult one = run_replicate(s, 2);
  CHECK(one.snapshots[1].rho.values == all.replicates[2][1].rho.values);
  CHECK(all.replicates[0][1].rho.values != all.replicates[1][1].rho.values);
  CHECK(all.report.replicates == 3);
  for (const auto& o : all.report.outputs) {
    CHECK(o.rho_l1.values.size() == 3);
    for (double e : o.rho_l1.values) CHECK(e >= 0.0);
    CHECK(o.rho_l1.std_error > 0.0);
  }
}

TEST_CASE("report.json and CSVs are written per output time") {
  Scenario s = small_gt();
  s.particles = 2000;
  s.replicates = 2;
  const auto dir = scratch_dir("report");
  run_scenario(s, {dir});
  const auto rep = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(rep["replicates"] == 2);
  CHECK(rep["outputs"].size() == 2);
  CHECK(rep["reference_scheme"] == "diffusion_ref");
  CHECK(rep["outputs"][1]["rho"]["L1"]["values"].size() == 2);
  CHECK(fs::exists(dir / rep["outputs"][0]["csv"].get<std::string>()));
  CHECK(fs::exists(dir / rep["outputs"][0]["reference_csv"].get<std::string>()));
  CHECK(fs::exists(dir / "apmc_r1_t0.01.csv"));
  // the embedded scenario parses back to the one that ran
  CHECK(parse_scenario(rep["scenario_definition"].dump()) == s);
}

TEST_CASE("deterministic schemes run as the main scheme") {
  Scenario s = builtin_scenario("rt-slab-ingress");
  s.scheme = Scheme::diffusion_ref;
  s.reference.reset();
  const RunResult r = run_scenario(s);
  REQUIRE(r.mean.size() == 3);
  CHECK(r.replicates.size() == 1);
  // mass entering through x=0 grows like sqrt(t)
  const double m1 = r.mean[0].rho.integral(), m3 = r.mean[2].rho.integral();
  CHECK(m3 / m1 == doctest::Approx(std::sqrt(15.0)).epsilon(0.05));
}

TEST_CASE("shipped scenario files match the built-ins") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const fs::path p = fs::path(APMC_SCENARIO_DIR) / (name + ".json");
    REQUIRE(fs::exists(p));
    CHECK(load_scenario_file(p.string()) == builtin_scenario(name));
  }
}
