#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "dirpart/eigensolver.hpp"
#include "dirpart/errors.hpp"
#include "oracles.hpp"

using namespace dirpart;

namespace {

GeometricGraph path5(std::vector<std::uint8_t> mask) {
  std::vector<GeometricGraph::Triplet> e;
  for (std::uint32_t i = 0; i + 1 < 5; ++i) e.push_back({i, i + 1, 1.0});
  return GeometricGraph(PointCloud(1, {0, 1, 2, 3, 4}), 5, e, std::move(mask), std::vector<double>(5, 0.2), 1.0,
                        "path");
}

std::vector<std::uint32_t> all_vertices(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

GeometricGraph random_graph(std::size_t n, std::uint64_t seed, double eps) {
  const auto space = SamplingSpace::with_margin(Domain::square(0, 1), 0.15);
  return build_graph(sample_iid(space, n, seed), KernelProfile{KernelKind::kGaussian}, eps);
}

std::vector<std::uint32_t> admissible_subset(const GeometricGraph& g, double keep, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::uint32_t> s;
  for (std::uint32_t i = 0; i < g.size(); ++i) {
    if (g.admissible(i) && std::uniform_real_distribution<double>(0, 1)(gen) < keep) s.push_back(i);
  }
  return s;
}

}  // namespace

TEST_CASE("empty effective support gives +inf") {
  const auto g = path5({0, 0, 0, 0, 0});
  CHECK(std::isinf(lambda1_subset(g, std::vector<std::uint32_t>{})));
  const RestrictedForm f{&g, all_vertices(5)};
  const auto r = smallest_eigenpair(f);
  CHECK(r.is_infinite());
  CHECK(std::all_of(r.vector.begin(), r.vector.end(), [](double x) { return x == 0.0; }));
}

TEST_CASE("path graph: free and clamped ends") {
  const auto g = path5({1, 1, 1, 1, 1});
  const auto r = smallest_eigenpair({&g, all_vertices(5)});
  CHECK(r.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  for (double x : r.vector) CHECK(x == doctest::Approx(1.0).epsilon(1e-8));

  const auto gm = path5({0, 1, 1, 1, 0});
  const auto c = smallest_eigenpair({&gm, all_vertices(5)});
  CHECK(c.value == doctest::Approx(2.0 * 5.0 * (2.0 - std::sqrt(2.0))).epsilon(1e-9));
  CHECK(c.vector[0] == 0.0);
  CHECK(c.vector[4] == 0.0);
  CHECK(nu_norm(gm, c.vector) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("single vertex: 1x1 principal submatrix excluding the self-loop") {
  const auto g = random_graph(40, 2, 0.25).with_self_loops(3.0);
  std::uint32_t i = 0;
  while (!g.admissible(i)) ++i;
  const std::vector<std::uint32_t> s{i};
  CHECK(lambda1_subset(g, s) == doctest::Approx(2.0 * 40 * g.degree(i)).epsilon(1e-10));
}

TEST_CASE("oracle equivalence with dense principal submatrices") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const std::size_t n = 30 + 14 * seed;
    const auto g = random_graph(n, seed, 0.18);
    const auto s = admissible_subset(g, 0.7, seed + 100);
    CHECK(lambda1_subset(g, s) == doctest::Approx(oracle::dense_lambda1(g, s)).epsilon(1e-8));
  }
}

TEST_CASE("normalized form against a dense oracle") {
  const auto g = random_graph(60, 7, 0.25);
  const auto s = admissible_subset(g, 0.8, 1);
  const Eigen::MatrixXd w = oracle::dense_weights(g);
  const Eigen::VectorXd dinv = w.rowwise().sum().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(w.rows(), w.rows()) - dinv.asDiagonal() * w * dinv.asDiagonal();
  Eigen::MatrixXd sub(s.size(), s.size());
  for (std::size_t r = 0; r < s.size(); ++r)
    for (std::size_t c = 0; c < s.size(); ++c) sub(r, c) = a(s[r], s[c]) / std::sqrt(g.mass(s[r]) * g.mass(s[c]));
  const double ref = 2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sub).eigenvalues()(0);
  CHECK(lambda1_subset(g, s, LaplacianKind::kNormalized) == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("monotonicity on nested subsets") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_graph(60, seed + 50, 0.2);
    auto b = admissible_subset(g, 0.9, seed);
    std::vector<std::uint32_t> a;
    std::mt19937_64 gen(seed);
    for (auto v : b)
      if (std::uniform_real_distribution<double>(0, 1)(gen) < 0.6) a.push_back(v);
    CHECK(lambda1_subset(g, a) >= lambda1_subset(g, b) * (1 - 1e-10));
  }
}

TEST_CASE("eigenvector: nonnegative, normalised, zero off support, small residual") {
  const auto g = random_graph(150, 3, 0.2);
  std::vector<std::uint32_t> s;
  for (std::uint32_t i = 0; i < g.size(); ++i)
    if (g.admissible(i)) s.push_back(i);
  const auto r = smallest_eigenpair({&g, s});
  REQUIRE(r.components >= 1);
  CHECK(nu_norm(g, r.vector) == doctest::Approx(1.0).epsilon(1e-10));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.admissible(i)) CHECK(r.vector[i] == 0.0);
    if (r.components == 1) CHECK(r.vector[i] >= -1e-8);
  }
  // Rayleigh quotient reproduces the value.
  CHECK(scalar_energy(g, r.vector) == doctest::Approx(r.value).epsilon(1e-8));
  CHECK(r.residual <= 1e-8);
}

TEST_CASE("conjugate-gradient inner solver agrees with the factorised one") {
  const auto g = random_graph(120, 9, 0.2);
  const auto s = admissible_subset(g, 1.0, 0);
  EigenOptions cg;
  cg.inner = InnerSolver::kConjugateGradient;
  const auto a = smallest_eigenpair({&g, s});
  const auto b = smallest_eigenpair({&g, s}, cg);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-8));
}

TEST_CASE("tolerance and iteration limits") {
  const auto g = random_graph(80, 1, 0.2);
  const auto s = admissible_subset(g, 1.0, 0);
  EigenOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(smallest_eigenpair({&g, s}, bad), InputError);
  EigenOptions tight;
  tight.tol = 1e-300;
  tight.maxit = 2;
  CHECK_THROWS_AS(smallest_eigenpair({&g, s}, tight), ConvergenceError);
}
