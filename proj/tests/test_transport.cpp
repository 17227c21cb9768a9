#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dirpart/errors.hpp"
#include "dirpart/transport.hpp"
#include "oracles.hpp"

using namespace dirpart;

namespace {

EmpiricalPair random_pair(std::size_t n, int d, std::size_t k, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0, 1);
  PointCloud p(d);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& c : x) c = u(gen);
    p.push_back(x);
  }
  std::vector<double> v(n * k);
  for (auto& c : v) c = u(gen);
  return EmpiricalPair::uniform(std::move(p), std::move(v), k);
}

EmpiricalPair weighted_pair(std::size_t n, std::mt19937_64& gen) {
  auto p = random_pair(n, 2, 1, gen);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  double total = 0;
  for (auto& m : p.masses) total += (m = u(gen));
  for (auto& m : p.masses) m /= total;
  return p;
}

double brute_force_permutations(const EmpiricalPair& a, const EmpiricalPair& b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double c = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += tl2_cost(a, i, b, perm[i]);
    best = std::min(best, c / static_cast<double>(a.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best);
}

// Uniform pair with point i repeated copies[i] times.
EmpiricalPair replicate(const EmpiricalPair& p, const std::vector<int>& copies) {
  PointCloud s(p.support.dim());
  std::vector<double> v;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (int c = 0; c < copies[i]; ++c) {
      s.push_back(p.support[i]);
      for (double x : p.value(i)) v.push_back(x);
    }
  }
  return EmpiricalPair::uniform(std::move(s), std::move(v), p.k);
}

}  // namespace

TEST_CASE("tl2 examples") {
  std::mt19937_64 gen(1);
  const auto a = random_pair(12, 2, 2, gen);
  const auto self = tl2_distance(a, a);
  CHECK(self.distance == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  for (const auto& e : self.plan.entries) CHECK(e.i == e.j);

  const auto x = EmpiricalPair::uniform(PointCloud(1, {0.0}), {0.0}, 1);
  const auto y = EmpiricalPair::uniform(PointCloud(1, {3.0}), {4.0}, 1);
  CHECK(tl2_distance(x, y).distance == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(tl2_distance(x, y, TransportMethod::kEntropic).distance == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("tl2 input validation") {
  std::mt19937_64 gen(2);
  const auto a = random_pair(4, 2, 1, gen);
  const auto b = random_pair(4, 3, 1, gen);
  const auto c = random_pair(4, 2, 2, gen);
  CHECK_THROWS_AS(tl2_distance(a, b), InputError);
  CHECK_THROWS_AS(tl2_distance(a, c), InputError);
  auto bad = a;
  bad.masses[0] = -0.1;
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("exact method equals brute force over all 5! permutations") {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = random_pair(5, 2, 1, gen);
    const auto b = random_pair(5, 2, 1, gen);
    CHECK(tl2_distance(a, b).distance == doctest::Approx(brute_force_permutations(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("assignment solver against brute force") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0, 10);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 6;
    std::vector<double> c(n * n);
    for (auto& x : c) x = u(gen);
    const auto p = solve_assignment(c, n);
    double got = 0;
    for (std::size_t i = 0; i < n; ++i) got += c[i * n + p[i]];
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += c[i * n + perm[i]];
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("min-cost flow on rational masses matches the replicated assignment") {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 10; ++rep) {
    auto a = random_pair(4, 2, 1, gen);
    auto b = random_pair(3, 2, 1, gen);
    const std::vector<int> ca{1, 2, 3, 6};  // 12 copies in total
    const std::vector<int> cb{5, 4, 3};
    for (std::size_t i = 0; i < 4; ++i) a.masses[i] = ca[i] / 12.0;
    for (std::size_t i = 0; i < 3; ++i) b.masses[i] = cb[i] / 12.0;
    const auto r = tl2_distance(a, b);
    CHECK_FALSE(r.approximate);
    CHECK(r.plan.marginal_error(a.masses, b.masses) <= 1e-12);
    CHECK(r.distance == doctest::Approx(tl2_distance(replicate(a, ca), replicate(b, cb)).distance).epsilon(1e-10));
  }
}

TEST_CASE("metric axioms on random triples") {
  std::mt19937_64 gen(6);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 4 + rep % 12;
    const auto a = random_pair(n, 2, 1, gen);
    const auto b = random_pair(n, 2, 1, gen);
    const auto c = random_pair(n, 2, 1, gen);
    const double ab = tl2_distance(a, b).distance;
    CHECK(std::abs(ab - tl2_distance(b, a).distance) <= 1e-10);
    CHECK(tl2_distance(a, a).distance <= 1e-12);
    CHECK(ab <= tl2_distance(a, c).distance + tl2_distance(c, b).distance + 1e-8);
  }
}

TEST_CASE("entropic method bounds the exact value from above and stays within 2%") {
  std::mt19937_64 gen(7);
  for (std::size_t n : {8u, 16u, 32u, 64u}) {
    const auto a = random_pair(n, 2, 1, gen);
    const auto b = weighted_pair(n / 2 + 3, gen);
    const auto ex = tl2_distance(a, b);
    const auto en = tl2_distance(a, b, TransportMethod::kEntropic);
    CHECK(en.approximate);
    CHECK(en.distance >= ex.distance * (1 - 1e-9));
    CHECK(en.distance <= ex.distance * 1.02);
    CHECK(en.plan.marginal_error(a.masses, b.masses) <= 1e-8);
  }
}

TEST_CASE("exact solver falls back to entropic above the cap") {
  std::mt19937_64 gen(8);
  const auto a = random_pair(20, 2, 1, gen);
  const auto b = random_pair(21, 2, 1, gen);
  TransportOptions o;
  o.exact_cap = 100;
  const auto r = tl2_distance(a, b, TransportMethod::kExact, o);
  CHECK(r.approximate);
  CHECK(r.method == TransportMethod::kEntropic);
}

TEST_CASE("identity coupling bound for shared supports") {
  std::mt19937_64 gen(9);
  const auto a = weighted_pair(30, gen);
  auto b = a;
  std::normal_distribution<double> z(0, 0.3);
  for (auto& v : b.values) v += z(gen);
  double bound = 0;
  for (std::size_t i = 0; i < a.size(); ++i) bound += a.masses[i] * std::pow(a.values[i] - b.values[i], 2);
  CHECK(tl2_distance(a, b).distance <= std::sqrt(bound) + 1e-12);
}

TEST_CASE("pair file round trip") {
  std::mt19937_64 gen(10);
  const auto a = weighted_pair(9, gen);
  std::stringstream ss;
  write_pair(ss, a);
  const auto b = read_pair(ss);
  CHECK(b.support == a.support);
  CHECK(b.masses == a.masses);
  CHECK(b.values == a.values);
}

TEST_CASE("nearest-neighbour maps") {
  PointCloud src(1), tgt(1, {0.25, 0.75});
  for (int i = 0; i <= 100; ++i) {
    const double x[] = {i / 100.0};
    src.push_back(x);
  }
  const auto id = nn_transport_map(src, src);
  CHECK(sup_deviation(id) == 0.0);
  CHECK(stagnation_cost(id, std::vector<double>(101, 1.0 / 101)) == 0.0);

  const auto m = nn_transport_map(src, tgt);
  CHECK(sup_deviation(m) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(m.target[50] == 0);  // tie at 0.5 goes to the smaller index
  double cost = 0;
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    const double d = std::min(std::abs(x - 0.25), std::abs(x - 0.75));
    cost += d * d / 101.0;
  }
  CHECK(stagnation_cost(m, std::vector<double>(101, 1.0 / 101)) == doctest::Approx(cost).epsilon(1e-12));
  const auto push = pushforward(m, std::vector<double>(101, 1.0 / 101), 2);
  CHECK(push[0] + push[1] == doctest::Approx(1.0));
  CHECK(push[0] == doctest::Approx(51.0 / 101));
}

TEST_CASE("sup deviation against a reference grid shrinks with n") {
  const auto space = SamplingSpace::same(Domain::square(0, 1));
  PointCloud grid(2);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) {
      const double x[] = {(i + 0.5) / 64, (j + 0.5) / 64};
      grid.push_back(x);
    }
  double prev = INFINITY;
  for (std::size_t n : {500u, 2000u, 8000u}) {
    const double sup = sup_deviation(nn_transport_map(grid, sample_iid(space, n, 3).points));
    const double rate = std::pow(std::log(static_cast<double>(n)), 0.75) / std::sqrt(static_cast<double>(n));
    MESSAGE("n=" << n << " sup/r(2,n)=" << sup / rate);
    CHECK(sup < prev);
    CHECK(sup / rate < 5.0);
    prev = sup;
  }
}

TEST_CASE("finite Hausdorff distance") {
  const PointCloud a(1, {0.0}), b(1, {1.0}), ab(1, {0.0, 1.0});
  CHECK(hausdorff_finite(a, a) == 0.0);
  CHECK(hausdorff_finite(a, b) == 1.0);
  CHECK(hausdorff_finite(ab, a) == 1.0);
  CHECK(directed_hausdorff(a, ab) == 0.0);
  CHECK_THROWS_AS(hausdorff_finite(a, PointCloud(1)), InputError);

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-2, 2);
  PointCloud p(2), q(2);
  for (int i = 0; i < 300; ++i) {
    const double x[] = {u(gen), u(gen) * 0.1};
    const double y[] = {u(gen) * 0.5, u(gen)};
    p.push_back(x);
    q.push_back(y);
  }
  double ref = 0;
  for (auto [s, t] : {std::pair{&p, &q}, std::pair{&q, &p}}) {
    for (std::size_t i = 0; i < s->size(); ++i) {
      double best = INFINITY;
      for (std::size_t j = 0; j < t->size(); ++j) best = std::min(best, distance((*s)[i], (*t)[j]));
      ref = std::max(ref, best);
    }
  }
  CHECK(hausdorff_finite(p, q) == doctest::Approx(ref).epsilon(1e-15));
}

TEST_CASE("Hausdorff distance to regions") {
  const auto disk = Domain::disk({0, 0}, 1.0);
  const double delta = 0.01;
  const auto self = discretize_closure(disk, delta);
  CHECK(hausdorff_to_region(self, disk, delta).distance == 0.0);

  const auto c = hausdorff_to_region(PointCloud(2, {0.0, 0.0}), disk, delta);
  CHECK(c.accuracy == delta);
  CHECK(std::abs(c.distance - 1.0) <= delta);

  const auto far = hausdorff_to_region(PointCloud(2, {10.0, 10.0}), disk, delta);
  // The directed part from the region dominates: the far side of the disk.
  CHECK(std::abs(far.distance - (std::hypot(10.0, 10.0) + 1.0)) <= delta);
  CHECK(std::abs(directed_hausdorff(PointCloud(2, {10.0, 10.0}), self) - (std::hypot(10.0, 10.0) - 1.0)) <= delta);
  CHECK(std::hypot(10.0, 10.0) - 1.0 == doctest::Approx(13.142).epsilon(1e-4));

  CHECK_THROWS_AS(hausdorff_to_region(PointCloud(2, {0.0, 0.0}), disk, 0.0), InputError);
}

TEST_CASE("restrict_pair") {
  std::mt19937_64 gen(12);
  const auto a = random_pair(40, 2, 2, gen);
  const auto all = restrict_pair(a, Domain::square(-1, 2));
  CHECK(all.values == a.values);
  const auto none = restrict_pair(a, Domain::square(5, 6));
  CHECK(std::all_of(none.values.begin(), none.values.end(), [](double v) { return v == 0.0; }));
  CHECK(none.masses == a.masses);

  const auto half = Domain::box({0.0, 0.0}, {0.5, 1.0});
  for (int rep = 0; rep < 10; ++rep) {
    const auto x = random_pair(16, 2, 1, gen);
    const auto y = random_pair(16, 2, 1, gen);
    const double full = tl2_distance(x, y).distance;
    const double res = tl2_distance(restrict_pair(x, half), restrict_pair(y, half)).distance;
    // |chi f - chi g| <= |f - g| + max(|f|, |g|) pointwise; values lie in [0, 1].
    CHECK(res <= full + 1.0 + 1e-12);
  }
}

TEST_CASE("restriction preserves convergence along a refining sequence") {
  // a_n: the n x n cell-centred grid of [0,1]^2 with f = x1 + x2.
  const auto make = [](int n) {
    PointCloud p(2);
    std::vector<double> v;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double x[] = {(i + 0.5) / n, (j + 0.5) / n};
        p.push_back(x);
        v.push_back(x[0] + x[1]);
      }
    return EmpiricalPair::uniform(std::move(p), std::move(v), 1);
  };
  const auto limit = make(24);
  const auto region = Domain::disk({0.5, 0.5}, 0.3);
  double prev_full = INFINITY, prev_res = INFINITY;
  for (int n : {3, 6, 12}) {
    const auto a = make(n);
    const double full = tl2_distance(a, limit).distance;
    const double res = tl2_distance(restrict_pair(a, region), restrict_pair(limit, region)).distance;
    CHECK(full < prev_full);
    CHECK(res < prev_res);
    prev_full = full;
    prev_res = res;
  }
  CHECK(prev_res < 0.15);
}

TEST_CASE("part matching recovers a permutation") {
  std::vector<PointCloud> ref{PointCloud(1, {0.0, 0.1}), PointCloud(1, {1.0, 1.1}), PointCloud(1, {2.0, 2.2})};
  std::vector<PointCloud> parts{ref[2], ref[0], ref[1]};
  const auto m = match_parts(parts, ref);
  CHECK(m.permutation == std::vector<std::size_t>{2, 0, 1});
  CHECK(m.total == 0.0);
}
