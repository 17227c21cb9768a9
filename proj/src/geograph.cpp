#include "dirpart/geograph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

#include "dirpart/errors.hpp"
#include "dirpart/random.hpp"
#include "dirpart/spatial.hpp"

namespace dirpart {

GeometricGraph::GeometricGraph(PointCloud points, std::size_t n, std::vector<Triplet> pairs,
                               std::vector<std::uint8_t> admissible, std::vector<double> mass,
                               double eps, std::string kernel)
    : points_(std::move(points)),
      n_(n),
      dim_(points_.dim()),
      admissible_(std::move(admissible)),
      mass_(std::move(mass)),
      eps_(eps),
      kernel_(std::move(kernel)) {
  if (!points_.empty() && points_.size() != n_) throw InputError("graph: point count does not match n");
  if (admissible_.size() != n_ || mass_.size() != n_) throw InputError("graph: mask/mass size mismatch");
  for (double m : mass_) {
    if (!(m > 0.0)) throw InputError("graph: vertex masses must be positive");
  }

  std::vector<std::size_t> count(n_ + 1, 0);
  for (const auto& t : pairs) {
    if (t.i >= n_ || t.j >= n_) throw InputError("graph: edge index out of range");
    if (!(t.w >= 0.0)) throw InputError("graph: weights must be nonnegative");
    ++count[t.i];
    if (t.i != t.j) ++count[t.j];
  }
  offsets_.assign(n_ + 1, 0);
  for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] = offsets_[i] + count[i];
  adj_.resize(offsets_[n_]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& t : pairs) {
    adj_[fill[t.i]++] = {t.j, t.w};
    if (t.i != t.j) adj_[fill[t.j]++] = {t.i, t.w};
  }
  pairs.clear();
  pairs.shrink_to_fit();

  // Sort rows and merge duplicate entries.
  std::vector<Neighbor> merged;
  merged.reserve(adj_.size());
  std::vector<std::size_t> new_offsets(n_ + 1, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    auto first = adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    auto last = adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    std::sort(first, last, [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    for (auto it = first; it != last; ++it) {
      if (merged.size() > new_offsets[i] && merged.back().index == it->index) {
        merged.back().weight += it->weight;
      } else {
        merged.push_back(*it);
      }
    }
    new_offsets[i + 1] = merged.size();
  }
  adj_ = std::move(merged);
  offsets_ = std::move(new_offsets);

  degree_.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (const auto& nb : neighbors(i)) {
      if (nb.index != i) degree_[i] += nb.weight;
    }
  }
  compute_id();
}

void GeometricGraph::compute_id() {
  std::uint64_t h = mix64(n_);
  h = hash_combine(h, std::bit_cast<std::uint64_t>(eps_));
  for (std::size_t i = 0; i < n_; ++i) {
    h = hash_combine(h, offsets_[i + 1]);
    h = hash_combine(h, admissible_[i]);
  }
  for (const auto& nb : adj_) {
    h = hash_combine(h, nb.index);
    h = hash_combine(h, std::bit_cast<std::uint64_t>(nb.weight));
  }
  id_ = h;
}

std::size_t GeometricGraph::admissible_count() const {
  return static_cast<std::size_t>(std::count(admissible_.begin(), admissible_.end(), std::uint8_t{1}));
}

GeometricGraph GeometricGraph::with_points(PointCloud points) const {
  if (points.size() != n_) throw InputError("with_points: point count does not match the graph");
  GeometricGraph out = *this;
  out.dim_ = points.dim();
  out.points_ = std::move(points);
  return out;
}

GeometricGraph GeometricGraph::with_self_loops(double w) const {
  std::vector<Triplet> pairs;
  pairs.reserve(adj_.size() / 2 + n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (const auto& nb : neighbors(i)) {
      if (nb.index > i) pairs.push_back({static_cast<std::uint32_t>(i), nb.index, nb.weight});
    }
    pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), w});
  }
  return GeometricGraph(points_, n_, std::move(pairs), admissible_, mass_, eps_, kernel_);
}

VertexField VertexField::from_column(std::vector<double> column, std::uint64_t gid) {
  VertexField f;
  f.n = column.size();
  f.k = 1;
  f.values = std::move(column);
  f.graph_id = gid;
  return f;
}

std::vector<double> VertexField::column(std::size_t l) const {
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = at(i, l);
  return c;
}

void VertexField::set_column(std::size_t l, std::span<const double> col) {
  if (col.size() != n) throw InputError("VertexField: column size mismatch");
  for (std::size_t i = 0; i < n; ++i) at(i, l) = col[i];
}

bool VertexField::in_sigma_k() const {
  for (std::size_t i = 0; i < n; ++i) {
    int nonzero = 0;
    for (std::size_t l = 0; l < k; ++l) nonzero += at(i, l) != 0.0;
    if (nonzero > 1) return false;
  }
  return true;
}

namespace {

std::vector<double> empirical_mass(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

}  // namespace

GeometricGraph build_graph(const SampleSet& samples, const KernelProfile& profile, double eps) {
  if (!(eps > 0.0)) throw InputError("build_graph: eps must be positive");
  const std::size_t n = samples.size();
  if (n == 0) throw InputError("build_graph: empty sample set");
  const int d = samples.points.dim();
  const double radius = profile.support_radius() * eps;

  BucketGrid grid(samples.points, radius);
  std::vector<GeometricGraph::Triplet> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = samples.points[i];
    grid.for_each_within(xi, radius, [&](std::uint32_t j) {
      if (j < i) return;
      const double w = scaled_weight_at(profile, eps, d, distance(xi, samples.points[j]));
      if (w > 0.0) pairs.push_back({static_cast<std::uint32_t>(i), j, w});
    });
  }
  return GeometricGraph(samples.points, n, std::move(pairs), samples.admissible, empirical_mass(n),
                        eps, kernel_name(profile.kind));
}

GeometricGraph build_graph_dense(const SampleSet& samples, const KernelProfile& profile, double eps) {
  if (!(eps > 0.0)) throw InputError("build_graph: eps must be positive");
  const std::size_t n = samples.size();
  if (n == 0) throw InputError("build_graph: empty sample set");
  const int d = samples.points.dim();
  const double radius = profile.support_radius() * eps;
  std::vector<GeometricGraph::Triplet> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double r = distance(samples.points[i], samples.points[j]);
      if (r > radius) continue;
      const double w = scaled_weight_at(profile, eps, d, r);
      if (w > 0.0) pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), w});
    }
  }
  return GeometricGraph(samples.points, n, std::move(pairs), samples.admissible, empirical_mass(n),
                        eps, kernel_name(profile.kind));
}

double scalar_energy(const GeometricGraph& g, std::span<const double> u) {
  if (u.size() != g.size()) throw InputError("scalar_energy: field size does not match graph");
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (const auto& nb : g.neighbors(i)) {
      const double t = u[i] - u[nb.index];
      e += nb.weight * t * t;
    }
  }
  return e;
}

double normalized_energy(const GeometricGraph& g, std::span<const double> u) {
  if (u.size() != g.size()) throw InputError("normalized_energy: field size does not match graph");
  std::vector<double> v(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (u[i] == 0.0) continue;
    if (!(g.degree(i) > 0.0)) {
      throw InputError("normalized_energy: vertex " + std::to_string(i) +
                       " has zero degree but nonzero value");
    }
    v[i] = u[i] / std::sqrt(g.degree(i));
  }
  return scalar_energy(g, v);
}

double dirichlet_energy(const GeometricGraph& g, const VertexField& u, double eps) {
  if (u.n != g.size()) throw InputError("dirichlet_energy: field size does not match graph");
  if (!(eps > 0.0)) throw InputError("dirichlet_energy: eps must be positive");
  double total = 0.0;
  for (std::size_t l = 0; l < u.k; ++l) total += scalar_energy(g, u.column(l));
  const double n = static_cast<double>(g.size());
  return total / (n * n * eps * eps);
}

double nu_norm(const GeometricGraph& g, std::span<const double> u) {
  if (u.size() != g.size()) throw InputError("nu_norm: field size does not match graph");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += g.mass(i) * u[i] * u[i];
  return std::sqrt(s);
}

void write_graph(std::ostream& os, const GeometricGraph& g) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << g.size() << ' ' << g.dim() << ' ' << g.eps() << ' ' << g.kernel() << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto nbs = g.neighbors(i);
    os << i << ' ' << g.mass(i) << ' ' << int(g.admissible_mask()[i]) << ' ' << nbs.size();
    for (const auto& nb : nbs) os << ' ' << nb.index << ' ' << nb.weight;
    os << '\n';
  }
}

GeometricGraph read_graph(std::istream& is) {
  std::size_t n = 0;
  int d = 0;
  double eps = 0.0;
  std::string kernel;
  if (!(is >> n >> d >> eps >> kernel)) throw InputError("graph file: malformed header");
  std::vector<double> mass(n);
  std::vector<std::uint8_t> mask(n);
  std::vector<GeometricGraph::Triplet> pairs;
  for (std::size_t row = 0; row < n; ++row) {
    std::size_t i = 0, count = 0;
    int bit = 0;
    if (!(is >> i >> mass[row] >> bit >> count) || i != row) throw InputError("graph file: malformed vertex line");
    mask[row] = static_cast<std::uint8_t>(bit != 0);
    for (std::size_t c = 0; c < count; ++c) {
      std::uint32_t j = 0;
      double w = 0.0;
      if (!(is >> j >> w)) throw InputError("graph file: truncated adjacency");
      if (j >= row) pairs.push_back({static_cast<std::uint32_t>(row), j, w});
    }
  }
  return GeometricGraph(PointCloud(d), n, std::move(pairs), std::move(mask), std::move(mass), eps, kernel);
}

}  // namespace dirpart
