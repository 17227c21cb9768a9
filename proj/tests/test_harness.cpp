#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dirpart/errors.hpp"
#include "dirpart/harness.hpp"
#include "oracles.hpp"

using namespace dirpart;

namespace {

std::string csv_of(const RunReport& r) {
  std::ostringstream os;
  emit_report(os, r, ReportFormat::kCsv);
  return os.str();
}

ExperimentConfig interval_config() {
  return parse_config(R"({
    "name": "interval", "domain": {"type": "interval", "lo": 0, "hi": 1},
    "kernel": "ball", "epsilon": {"c": 3, "alpha": 0.5}, "n": [200, 400], "k": 2,
    "mode": "dirichlet", "restarts": 3, "seeds": [0, 1]
  })");
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("dirpart-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing: defaults, round trip and errors") {
  const auto d = parse_config("{}");
  CHECK(d.restarts == 20);
  CHECK(d.max_iterations == 300);
  CHECK(d.eps_alpha == 0.3);
  CHECK(d.n_list.empty());

  const auto c = interval_config();
  CHECK(c.kernel == KernelKind::kIndicator);
  CHECK(c.n_list == std::vector<std::size_t>{200, 400});
  const auto again = parse_config(config_to_json(c));
  CHECK(config_to_json(again) == config_to_json(c));

  CHECK_THROWS_AS(parse_config(R"({"restart": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"k": "three"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"domain": {"type": "hexagon"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kernel": "cauchy"})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/dirpart.json"), ConfigError);
}

TEST_CASE("domain parsing") {
  const auto f = parse_domain(R"({"type": "flower"})");
  CHECK(f.area() == doctest::Approx(1.045 * oracle::kPi).epsilon(1e-10));
  const auto b = parse_domain(R"({"type": "box", "lo": [0, 0, 0], "hi": [1, 2, 3]})");
  CHECK(b.dim() == 3);
  CHECK(b.area() == doctest::Approx(6.0));
}

TEST_CASE("empty n list gives an empty report and a header-only CSV") {
  auto c = interval_config();
  c.n_list.clear();
  const auto r = run_sweep(c);
  CHECK(r.records.empty());
  const auto csv = csv_of(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
}

TEST_CASE("CSV schema and round trip") {
  for (std::size_t k : {1u, 3u, 5u}) CHECK(csv_header(k).size() == 7 + 2 * k);
  CHECK(csv_header(2).back() == "tl2_approximate");
  RunReport r;
  r.name = "x";
  r.k = 2;
  r.records.push_back({100, 3, 1.5, {0.5, 1.0}, {0.1, 0.2}, 0.3, 0.05, 0.0, false, ""});
  r.records.push_back({200, 4, 0.1 + 0.2, {0.1, 0.2}, {std::nan(""), 0.25}, INFINITY, 0.01, 0.0, true, ""});
  std::istringstream is(csv_of(r));
  const auto back = parse_csv(is);
  REQUIRE(back.records.size() == 2);
  CHECK(back.k == 2);
  CHECK(back.records[1].objective == r.records[1].objective);
  CHECK(back.records[0].lambda == r.records[0].lambda);
  CHECK(std::isnan(back.records[1].hausdorff[0]));
  CHECK(std::isinf(back.records[1].tl2));
  CHECK(back.records[1].tl2_approximate);
  CHECK(csv_of(back) == csv_of(r));
}

TEST_CASE("interval sweep: records, objective sums, determinism") {
  const auto c = interval_config();
  const auto a = run_sweep(c);
  REQUIRE(a.records.size() == 4);
  CHECK(a.reference == "interval");
  CHECK(a.schema_version == kReportSchemaVersion);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& r = a.records[i];
    CHECK(r.error.empty());
    CHECK(r.n == c.n_list[i / 2]);
    CHECK(r.seed == c.seeds[i % 2]);
    CHECK(r.objective == doctest::Approx(r.lambda[0] + r.lambda[1]).epsilon(1e-10));
    CHECK(r.hausdorff.size() == 2);
    CHECK(r.tl2 > 0.0);
    CHECK(r.sup_dev > 0.0);
  }
  auto threaded = c;
  threaded.workers = 3;
  CHECK(csv_of(run_sweep(threaded)) == csv_of(a));
}

TEST_CASE("k = 1 interval sweep: Hausdorff distance trend") {
  auto c = interval_config();
  c.k = 1;
  c.n_list = {100, 400, 1600};
  c.seeds = {5};
  c.compute_tl2 = false;
  const auto r = run_sweep(c);
  REQUIRE(r.records.size() == 3);
  for (const auto& rec : r.records) MESSAGE("n=" << rec.n << " hausdorff=" << rec.hausdorff[0]);
  CHECK(r.records.back().hausdorff[0] <= r.records.front().hausdorff[0]);
}

TEST_CASE("non-admissible rules are stamped") {
  auto c = interval_config();
  c.inner = Domain::square(0, 1);
  c.eps_alpha = 0.5;
  c.n_list = {150};
  c.seeds = {0};
  c.k = 1;
  c.reference = ReferenceKind::kNone;
  const auto r = run_sweep(c);
  CHECK_FALSE(r.admissible);
  CHECK_FALSE(r.admissibility.empty());
  std::ostringstream os;
  emit_report(os, r, ReportFormat::kText);
  CHECK(os.str().find("admissible false") != std::string::npos);
}

TEST_CASE("per-cell errors are recorded and the sweep continues") {
  auto c = interval_config();
  c.n_list = {1, 200};  // one sample cannot host two parts
  c.seeds = {0};
  const auto r = run_sweep(c);
  REQUIRE(r.records.size() == 2);
  CHECK_FALSE(r.records[0].error.empty());
  CHECK(r.records[1].error.empty());
  CHECK(r.failures() == 1);
}

TEST_CASE("grid reference is cached under a content hash") {
  const auto dir = scratch("cache");
  auto c = parse_config(R"({"domain": {"type": "disk"}, "k": 2, "grid_n": 24, "grid_restarts": 2})");
  c.cache_dir = dir.string();
  const auto a = grid_reference(c);
  CHECK(std::filesystem::exists(dir / ("grid-" + grid_reference_key(c) + ".txt")));
  const auto b = grid_reference(c);
  REQUIRE(a.parts.size() == 2);
  CHECK(a.parts[0] == b.parts[0]);
  CHECK(a.objective == b.objective);
  auto other = c;
  other.grid_n = 25;
  CHECK(grid_reference_key(other) != grid_reference_key(c));
  std::filesystem::remove_all(dir);
}

TEST_CASE("report files") {
  const auto dir = scratch("report");
  auto c = interval_config();
  c.n_list = {100};
  c.seeds = {0};
  emit_report_files(run_sweep(c), dir.string());
  CHECK(std::filesystem::exists(dir / "interval.csv"));
  CHECK(std::filesystem::exists(dir / "interval.txt"));
  CHECK_THROWS(emit_report_files(run_sweep(c), "/proc/definitely/not/writable"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("energy convergence: constant, bumps and sin fields") {
  auto c = parse_config(R"({"domain": {"type": "square"}, "mode": "zaremba", "kernel": "gauss",
                             "epsilon": {"c": 1, "alpha": 0.25}, "n": [500], "seeds": [0, 1]})");
  const auto zero = run_energy_convergence(c, test_field("const"));
  for (const auto& r : zero) {
    CHECK(r.discrete == 0.0);
    CHECK(r.ratio == 0.0);
  }

  const auto sin_rows = run_energy_convergence(c, test_field("sin"));
  for (const auto& r : sin_rows) {
    CHECK(r.continuum == doctest::Approx(oracle::kPi * oracle::kPi * oracle::kPi / 4).epsilon(1e-6));
    CHECK(r.ratio == doctest::Approx(r.discrete / r.continuum).epsilon(1e-12));
  }
  const auto med = median_ratio(sin_rows);
  REQUIRE(med.size() == 1);
  CHECK(med[0].first == 500);

  // The two bumps have disjoint supports, so the energy splits.
  const auto bumps = test_field("bumps");
  const ScalarField left = [&](std::span<const double> x) { return x[0] < 0.5 ? bumps(x) : 0.0; };
  const ScalarField right = [&](std::span<const double> x) { return x[0] >= 0.5 ? bumps(x) : 0.0; };
  const auto both = run_energy_convergence(c, bumps);
  const auto l = run_energy_convergence(c, left);
  const auto r = run_energy_convergence(c, right);
  for (std::size_t i = 0; i < both.size(); ++i) {
    CHECK(both[i].discrete <= l[i].discrete + r[i].discrete + 1e-12);
    CHECK(both[i].continuum == doctest::Approx(l[i].continuum + r[i].continuum).epsilon(1e-5));
  }
  CHECK_THROWS_AS(test_field("wave"), ConfigError);
}
