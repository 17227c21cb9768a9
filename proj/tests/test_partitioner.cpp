#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "dirpart/errors.hpp"
#include "dirpart/partitioner.hpp"
#include "interval_stats.hpp"
#include "oracles.hpp"

using namespace dirpart;

namespace {

GeometricGraph disk_graph(std::size_t n, std::uint64_t seed, double eps = 0.35) {
  const auto space = SamplingSpace::with_margin(Domain::disk({0, 0}, 1.0), 0.15);
  return build_graph(sample_iid(space, n, seed), KernelProfile{KernelKind::kGaussian}, eps);
}

std::vector<std::uint32_t> admissible_of(const GeometricGraph& g) {
  std::vector<std::uint32_t> v;
  for (std::uint32_t i = 0; i < g.size(); ++i)
    if (g.admissible(i)) v.push_back(i);
  return v;
}

void check_state(const GeometricGraph& g, const SolverConfig& c, const PartitionState& s) {
  double sum = 0;
  for (const auto& e : s.eigenpairs) sum += e.value;
  CHECK(s.objective == doctest::Approx(sum).epsilon(1e-12));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (c.mode == PartitionMode::kDirichlet && !g.admissible(i)) {
      CHECK(s.labels[i] == kUnassigned);
    } else {
      CHECK(s.labels[i] >= 0);
      CHECK(s.labels[i] < static_cast<int>(c.k));
    }
  }
}

}  // namespace

TEST_CASE("mode names") {
  CHECK(parse_mode("zaremba") == PartitionMode::kZaremba);
  CHECK(mode_name(PartitionMode::kDirichlet) == "dirichlet");
  CHECK_THROWS_AS(parse_mode("neumann"), InputError);
}

TEST_CASE("init_partition: k = 1, k = all, determinism") {
  const auto g = disk_graph(80, 1);
  SolverConfig c;
  c.k = 1;
  const auto one = init_partition(g, c, 0);
  check_state(g, c, one);
  CHECK(one.objective == doctest::Approx(lambda1_subset(g, admissible_of(g))).epsilon(1e-9));

  const auto adm = admissible_of(g);
  c.k = adm.size();
  const auto all = init_partition(g, c, 0);
  std::set<int> used;
  for (auto v : adm) used.insert(all.labels[v]);
  CHECK(used.size() == adm.size());

  c.k = 3;
  c.seed = 42;
  CHECK(init_partition(g, c, 2).labels == init_partition(g, c, 2).labels);

  c.k = adm.size() + 1;
  CHECK_THROWS_AS(init_partition(g, c, 0), InputError);
}

TEST_CASE("rearrange_step: fixed point and monotone objective") {
  const auto g = disk_graph(250, 3);
  SolverConfig c;
  c.k = 3;
  auto s = init_partition(g, c, 0);
  for (int it = 0; it < 100 && !s.converged; ++it) {
    const auto next = rearrange_step(g, c, s);
    CHECK(next.objective <= s.objective);
    check_state(g, c, next);
    s = next;
  }
  REQUIRE(s.converged);
  const auto again = rearrange_step(g, c, s);
  CHECK(again.labels == s.labels);
  CHECK(again.objective == s.objective);
}

TEST_CASE("path of ten points splits 5 + 5 in Zaremba mode") {
  PointCloud p(2);
  for (int i = 0; i < 10; ++i) {
    const double x[] = {0.1 * i, 0.0};
    p.push_back(x);
  }
  SampleSet s{p, 0, std::vector<std::uint8_t>(10, 1)};
  const auto g = build_graph(s, KernelProfile{KernelKind::kIndicator}, 0.15);
  SolverConfig c;
  c.k = 2;
  c.mode = PartitionMode::kZaremba;
  c.restarts = 5;
  const auto r = solve(g, c);

  std::vector<std::uint32_t> all(10);
  std::iota(all.begin(), all.end(), 0u);
  const double best = oracle::brute_force_two_parts(all, [&](const std::vector<std::uint32_t>& part) {
    return oracle::dense_lambda1(g, part);
  });
  CHECK(r.best.objective == doctest::Approx(best).epsilon(1e-8));
  for (int i = 1; i < 5; ++i) CHECK(r.best.labels[i] == r.best.labels[0]);
  for (int i = 6; i < 10; ++i) CHECK(r.best.labels[i] == r.best.labels[5]);
  CHECK(r.best.labels[0] != r.best.labels[5]);
}

TEST_CASE("solve: k = 1 is the principal eigenpair") {
  const auto g = disk_graph(150, 4);
  SolverConfig c;
  c.k = 1;
  c.restarts = 2;
  const auto r = solve(g, c);
  const auto direct = smallest_eigenpair({&g, admissible_of(g)});
  CHECK(r.best.objective == doctest::Approx(direct.value).epsilon(1e-9));
  const auto col = r.ground_state.field.column(0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(col[i] == doctest::Approx(direct.vector[i]).epsilon(1e-6).scale(1.0));
}

TEST_CASE("ground state: Sigma_k, nonnegative columns, norms and energy relation") {
  const auto g = disk_graph(300, 6);
  for (auto mode : {PartitionMode::kDirichlet, PartitionMode::kZaremba}) {
    SolverConfig c;
    c.k = 3;
    c.mode = mode;
    c.restarts = 3;
    const auto r = solve(g, c);
    check_state(g, c, r.best);
    const auto& f = r.ground_state.field;
    CHECK(f.in_sigma_k());
    for (std::size_t l = 0; l < c.k; ++l) {
      const auto col = f.column(l);
      CHECK(nu_norm(g, col) == doctest::Approx(1.0).epsilon(1e-10));
      for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(col[i] >= -1e-8);
        if (col[i] != 0.0) CHECK(r.best.labels[i] == static_cast<int>(l));
        if (mode == PartitionMode::kDirichlet && !g.admissible(i)) CHECK(col[i] == 0.0);
      }
    }
    const double n = static_cast<double>(g.size());
    CHECK(dirichlet_energy(g, f, g.eps()) * n * n * g.eps() * g.eps() ==
          doctest::Approx(r.best.objective).epsilon(1e-7));
    CHECK(r.restart_objectives.size() == 3);
    CHECK(*std::min_element(r.restart_objectives.begin(), r.restart_objectives.end()) == r.best.objective);
  }
}

TEST_CASE("assemble_ground_state rejects zero columns") {
  const auto g = disk_graph(100, 8);
  SolverConfig c;
  c.k = 2;
  auto s = init_partition(g, c, 0);
  std::fill(s.eigenpairs[1].vector.begin(), s.eigenpairs[1].vector.end(), 0.0);
  CHECK_THROWS_AS(assemble_ground_state(g, s), InvariantError);
}

TEST_CASE("label permutation leaves the objective unchanged") {
  const auto g = disk_graph(200, 9);
  SolverConfig c;
  c.k = 3;
  const auto s = init_partition(g, c, 1);
  std::vector<int> perm = s.labels;
  for (auto& l : perm)
    if (l >= 0) l = (l + 1) % 3;
  const auto t = make_state(g, c, perm);
  CHECK(t.objective == doctest::Approx(s.objective).epsilon(1e-9));
}

TEST_CASE("small instances reach the brute-force optimum") {
  int hits = 0;
  for (std::uint64_t inst = 0; inst < 10; ++inst) {
    const auto g = build_graph(sample_iid(SamplingSpace::same(Domain::square(0, 1)), 10, 1000 + inst),
                               KernelProfile{KernelKind::kGaussian}, 0.4);
    SolverConfig c;
    c.k = 2;
    c.mode = PartitionMode::kZaremba;
    c.restarts = 20;
    c.seed = inst;
    const auto r = solve(g, c);
    const double best = oracle::brute_force_two_parts(
        admissible_of(g), [&](const std::vector<std::uint32_t>& p) { return oracle::dense_lambda1(g, p); });
    CHECK(r.best.objective >= best * (1 - 1e-8));
    if (r.best.objective <= best * (1 + 1e-8)) ++hits;
  }
  CHECK(hits >= 8);
}

TEST_CASE("1D three-part partitions on n = 400") {
  int dir = 0, zar = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SampleSet s;
    const auto d = stats::solve_interval(400, seed, false, 4.0, 0.5, 10, &s);
    if (stats::dirichlet_breakpoints_ok(stats::split_of(s, d.best.labels, 3))) ++dir;
    const auto z = stats::solve_interval(400, seed, true, 4.0, 0.5, 10, &s);
    if (stats::zaremba_ratio_ok(stats::split_of(s, z.best.labels, 3))) ++zar;
  }
  MESSAGE("dirichlet " << dir << "/10, zaremba " << zar << "/10");
  CHECK(dir >= 7);
  CHECK(zar >= 7);
}
