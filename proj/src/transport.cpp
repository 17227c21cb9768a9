#include "dirpart/transport.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <numeric>

#include "dirpart/errors.hpp"
#include "dirpart/spatial.hpp"

namespace dirpart {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_compatible(const EmpiricalPair& a, const EmpiricalPair& b) {
  a.validate();
  b.validate();
  if (a.support.dim() != b.support.dim()) {
    throw InputError("tl2_distance: dimension mismatch (" + std::to_string(a.support.dim()) + " vs " +
                     std::to_string(b.support.dim()) + ")");
  }
  if (a.k != b.k) {
    throw InputError("tl2_distance: value dimension mismatch (" + std::to_string(a.k) + " vs " +
                     std::to_string(b.k) + ")");
  }
}

std::vector<double> cost_matrix(const EmpiricalPair& a, const EmpiricalPair& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> c(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) c[i * m + j] = tl2_cost(a, i, b, j);
  }
  return c;
}

bool uniform_masses(std::span<const double> m) {
  const double u = 1.0 / static_cast<double>(m.size());
  return std::all_of(m.begin(), m.end(), [u](double x) { return std::abs(x - u) <= 1e-12 * u; });
}

double plan_cost(const TransportPlan& plan, std::span<const double> c, std::size_t m) {
  double s = 0.0;
  for (const auto& e : plan.entries) s += e.mass * c[e.i * m + e.j];
  return s;
}

// Successive shortest paths on the complete bipartite graph with dense
// Dijkstra and node potentials.
TransportPlan min_cost_flow(std::span<const double> c, std::span<const double> supply,
                            std::span<const double> demand) {
  const std::size_t n = supply.size();
  const std::size_t m = demand.size();
  const std::size_t v = n + m;
  const double tiny = 1e-15;

  std::vector<double> flow(n * m, 0.0);
  std::vector<std::vector<std::uint32_t>> carried(m);  // sources with flow into sink j
  std::vector<double> left_s(supply.begin(), supply.end());
  std::vector<double> left_d(demand.begin(), demand.end());
  std::vector<double> pot(v, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double lo = kInf;
    for (std::size_t i = 0; i < n; ++i) lo = std::min(lo, c[i * m + j]);
    pot[n + j] = lo;
  }

  std::vector<double> dist(v);
  std::vector<std::int64_t> parent(v);
  std::vector<std::uint8_t> done(v);
  double remaining = std::accumulate(left_s.begin(), left_s.end(), 0.0);
  double remaining_d = std::accumulate(left_d.begin(), left_d.end(), 0.0);
  const double stop = 1e-12;

  while (std::min(remaining, remaining_d) > stop) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (left_s[i] > tiny) dist[i] = 0.0;
    }
    std::size_t target = v;
    while (true) {
      std::size_t u = v;
      double best = kInf;
      for (std::size_t x = 0; x < v; ++x) {
        if (!done[x] && dist[x] < best) {
          best = dist[x];
          u = x;
        }
      }
      if (u == v) break;
      done[u] = 1;
      if (u >= n && left_d[u - n] > tiny) {
        target = u;
        break;
      }
      if (u < n) {
        const double* row = c.data() + u * m;
        for (std::size_t j = 0; j < m; ++j) {
          const std::size_t w = n + j;
          if (done[w]) continue;
          const double nd = best + row[j] + pot[u] - pot[w];
          if (nd < dist[w]) {
            dist[w] = nd;
            parent[w] = static_cast<std::int64_t>(u);
          }
        }
      } else {
        const std::size_t j = u - n;
        auto& list = carried[j];
        std::erase_if(list, [&](std::uint32_t i) { return flow[i * m + j] <= 0.0; });
        for (std::uint32_t i : list) {
          if (done[i]) continue;
          const double nd = best - c[i * m + j] + pot[u] - pot[i];
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = static_cast<std::int64_t>(u);
          }
        }
      }
    }
    if (target == v) {
      if (std::min(remaining, remaining_d) < 1e-9) break;  // rounding residue in the marginals
      throw NumericError("min_cost_flow: no augmenting path", remaining);
    }

    const double dt = dist[target];
    for (std::size_t x = 0; x < v; ++x) pot[x] += std::min(dist[x], dt);

    double push = left_d[target - n];
    std::size_t x = target;
    while (parent[x] >= 0) {
      const auto p = static_cast<std::size_t>(parent[x]);
      if (p >= n) push = std::min(push, flow[x * m + (p - n)]);  // backward arc sink p -> source x
      x = p;
    }
    push = std::min(push, left_s[x]);
    left_s[x] -= push;
    left_d[target - n] -= push;
    remaining -= push;
    remaining_d -= push;
    x = target;
    while (parent[x] >= 0) {
      const auto p = static_cast<std::size_t>(parent[x]);
      if (p < n) {
        double& f = flow[p * m + (x - n)];
        if (f <= 0.0) carried[x - n].push_back(static_cast<std::uint32_t>(p));
        f += push;
      } else {
        double& f = flow[x * m + (p - n)];
        f -= push;
        if (f < tiny) f = 0.0;
      }
      x = p;
    }
  }

  TransportPlan plan;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (flow[i * m + j] > 0.0) plan.entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), flow[i * m + j]});
    }
  }
  return plan;
}

// Matrix scaling with absorption of the scalings into log-domain potentials,
// warm-started across the regularisation schedule.
TransportPlan entropic_plan(std::span<const double> c, std::span<const double> a,
                            std::span<const double> b, const TransportOptions& opt,
                            double& final_reg) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> sorted(c.begin(), c.end());
  auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  double median = *mid;
  if (median <= 0.0) median = *std::max_element(sorted.begin(), sorted.end());
  if (median <= 0.0) median = 1.0;

  std::vector<double> f(n, 0.0), g(m, 0.0), kern(n * m), u(n), w(m), kv(n), ku(m);
  double reg = 0.0;

  auto rebuild = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) kern[i * m + j] = std::exp((f[i] + g[j] - c[i * m + j]) / reg);
    }
    std::fill(u.begin(), u.end(), 1.0);
    std::fill(w.begin(), w.end(), 1.0);
  };
  auto absorb = [&] {
    for (std::size_t i = 0; i < n; ++i) f[i] += reg * std::log(u[i]);
    for (std::size_t j = 0; j < m; ++j) g[j] += reg * std::log(w[j]);
  };

  for (double factor : opt.schedule) {
    reg = factor * median;
    rebuild();
    bool converged = false;
    std::size_t it = 0;
    double err = kInf;
    while (it < opt.max_scaling_iterations) {
      ++it;
      bool degenerate = false;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        const double* row = kern.data() + i * m;
        for (std::size_t j = 0; j < m; ++j) s += row[j] * w[j];
        kv[i] = s;
        if (!(s > 0.0)) degenerate = true;
      }
      if (!degenerate) {
        for (std::size_t i = 0; i < n; ++i) u[i] = a[i] / kv[i];
        std::fill(ku.begin(), ku.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const double* row = kern.data() + i * m;
          for (std::size_t j = 0; j < m; ++j) ku[j] += row[j] * u[i];
        }
        for (std::size_t j = 0; j < m; ++j) {
          if (!(ku[j] > 0.0)) degenerate = true;
        }
      }
      if (degenerate) {
        // Underflow: move the current scalings into the potentials and retry
        // once with a fresh kernel; a second failure is fatal.
        absorb();
        rebuild();
        bool empty_row = false;
        for (std::size_t i = 0; i < n && !empty_row; ++i) {
          empty_row = std::all_of(kern.begin() + i * m, kern.begin() + (i + 1) * m, [](double x) { return x == 0.0; });
        }
        if (empty_row) throw NumericError("entropic transport underflow at reg = " + std::to_string(reg), err);
        continue;
      }
      for (std::size_t j = 0; j < m; ++j) w[j] = b[j] / ku[j];

      // Column marginals are exact after the w update; check the rows.
      if (it % 10 == 0) {
        err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          double s = 0.0;
          const double* row = kern.data() + i * m;
          for (std::size_t j = 0; j < m; ++j) s += row[j] * w[j];
          err += std::abs(u[i] * s - a[i]);
        }
        if (err <= opt.marginal_tol) {
          converged = true;
          break;
        }
      }
      const auto [ulo, uhi] = std::minmax_element(u.begin(), u.end());
      const auto [wlo, whi] = std::minmax_element(w.begin(), w.end());
      if (*uhi > 1e50 || *ulo < 1e-50 || *whi > 1e50 || *wlo < 1e-50) {
        absorb();
        rebuild();
      }
    }
    if (!converged) {
      throw NumericError("entropic transport did not converge at reg = " + std::to_string(reg), err);
    }
    absorb();
  }
  final_reg = reg;

  // Round onto the transport polytope: scale rows and columns down, then add
  // the rank-one correction for the remaining marginal deficit.
  std::vector<double> pi(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) pi[i * m + j] = std::exp((f[i] + g[j] - c[i * m + j]) / reg);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += pi[i * m + j];
    const double x = s > 0.0 ? std::min(1.0, a[i] / s) : 1.0;
    for (std::size_t j = 0; j < m; ++j) pi[i * m + j] *= x;
  }
  std::vector<double> col(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) col[j] += pi[i * m + j];
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double y = col[j] > 0.0 ? std::min(1.0, b[j] / col[j]) : 1.0;
    for (std::size_t i = 0; i < n; ++i) pi[i * m + j] *= y;
  }
  std::vector<double> da(n), db(m, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      s += pi[i * m + j];
      db[j] += pi[i * m + j];
    }
    da[i] = std::max(0.0, a[i] - s);
    total += da[i];
  }
  for (std::size_t j = 0; j < m; ++j) db[j] = std::max(0.0, b[j] - db[j]);
  TransportPlan plan;
  plan.entries.reserve(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double p = pi[i * m + j];
      if (total > 0.0) p += da[i] * db[j] / total;
      if (p > 0.0) plan.entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), p});
    }
  }
  return plan;
}

double cell_size_for(const PointCloud& pts) {
  const int d = pts.dim();
  double extent = 0.0;
  for (int c = 0; c < d; ++c) {
    double lo = kInf, hi = -kInf;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      lo = std::min(lo, pts[i][c]);
      hi = std::max(hi, pts[i][c]);
    }
    extent = std::max(extent, hi - lo);
  }
  if (extent <= 0.0) return 1.0;
  return extent / std::pow(static_cast<double>(pts.size()), 1.0 / d);
}

}  // namespace

void EmpiricalPair::validate() const {
  const std::size_t n = size();
  if (n == 0) throw InputError("empirical pair: empty support");
  if (masses.size() != n) throw InputError("empirical pair: mass count does not match support");
  if (values.size() != n * k) throw InputError("empirical pair: value rows do not match support");
  double s = 0.0;
  for (double m : masses) {
    if (!(m > 0.0)) throw InputError("empirical pair: masses must be positive");
    s += m;
  }
  if (std::abs(s - 1.0) > 1e-9) throw InputError("empirical pair: masses sum to " + std::to_string(s));
}

EmpiricalPair EmpiricalPair::uniform(PointCloud support, std::vector<double> values, std::size_t k) {
  EmpiricalPair p;
  const std::size_t n = support.size();
  p.support = std::move(support);
  p.masses.assign(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
  p.k = k;
  p.values = std::move(values);
  return p;
}

void write_pair(std::ostream& os, const EmpiricalPair& pair) {
  const auto prec = os.precision(std::numeric_limits<double>::max_digits10);
  const int d = pair.support.dim();
  os << pair.size() << " " << d << " " << pair.k << "\n";
  for (std::size_t i = 0; i < pair.size(); ++i) {
    for (int c = 0; c < d; ++c) os << pair.support[i][c] << " ";
    os << pair.masses[i];
    for (double f : pair.value(i)) os << " " << f;
    os << "\n";
  }
  os.precision(prec);
}

EmpiricalPair read_pair(std::istream& is) {
  std::size_t n = 0, k = 0;
  int d = 0;
  if (!(is >> n >> d >> k) || d < 1) throw InputError("pair file: malformed header");
  EmpiricalPair p;
  p.k = k;
  p.support = PointCloud(d);
  p.support.reserve(n);
  p.masses.resize(n);
  p.values.resize(n * k);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) {
      if (!(is >> x[c])) throw InputError("pair file: truncated at point " + std::to_string(i));
    }
    p.support.push_back(x);
    if (!(is >> p.masses[i])) throw InputError("pair file: missing mass at point " + std::to_string(i));
    for (std::size_t l = 0; l < k; ++l) {
      if (!(is >> p.values[i * k + l])) throw InputError("pair file: missing value at point " + std::to_string(i));
    }
  }
  p.validate();
  return p;
}

double TransportPlan::marginal_error(std::span<const double> source, std::span<const double> target) const {
  std::vector<double> rows(source.size(), 0.0), cols(target.size(), 0.0);
  for (const auto& e : entries) {
    rows.at(e.i) += e.mass;
    cols.at(e.j) += e.mass;
  }
  double err = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) err = std::max(err, std::abs(rows[i] - source[i]));
  for (std::size_t j = 0; j < cols.size(); ++j) err = std::max(err, std::abs(cols[j] - target[j]));
  return err;
}

double tl2_cost(const EmpiricalPair& a, std::size_t i, const EmpiricalPair& b, std::size_t j) {
  double s = squared_distance(a.support[i], b.support[j]);
  const auto fa = a.value(i);
  const auto fb = b.value(j);
  for (std::size_t l = 0; l < a.k; ++l) {
    const double d = fa[l] - fb[l];
    s += d * d;
  }
  return s;
}

std::vector<std::uint32_t> solve_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw InputError("solve_assignment: cost matrix is not n x n");
  // Shortest augmenting paths with row/column potentials, 1-based internally.
  std::vector<double> pu(n + 1, 0.0), pv(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<std::uint8_t> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - pu[i0] - pv[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          pu[match[j]] += delta;
          pv[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::uint32_t> out(n);
  for (std::size_t j = 1; j <= n; ++j) out[match[j] - 1] = static_cast<std::uint32_t>(j - 1);
  return out;
}

TransportResult tl2_distance(const EmpiricalPair& a, const EmpiricalPair& b, TransportMethod method,
                             const TransportOptions& options) {
  check_compatible(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const auto c = cost_matrix(a, b);
  TransportResult r;
  if (method == TransportMethod::kExact && n * m > options.exact_cap) method = TransportMethod::kEntropic;
  r.method = method;
  if (method == TransportMethod::kExact) {
    if (n == m && uniform_masses(a.masses) && uniform_masses(b.masses)) {
      const auto perm = solve_assignment(c, n);
      const double w = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) r.plan.entries.push_back({static_cast<std::uint32_t>(i), perm[i], w});
    } else {
      r.plan = min_cost_flow(c, a.masses, b.masses);
    }
  } else {
    r.plan = entropic_plan(c, a.masses, b.masses, options, r.final_regularization);
    r.approximate = true;
  }
  r.distance = std::sqrt(std::max(0.0, plan_cost(r.plan, c, m)));
  return r;
}

TransportMap nn_transport_map(const PointCloud& source, const PointCloud& target) {
  if (source.empty() || target.empty()) throw InputError("nn_transport_map: empty point set");
  if (source.dim() != target.dim()) throw InputError("nn_transport_map: dimension mismatch");
  TransportMap map;
  map.source = source;
  map.target.resize(source.size());
  map.displacement.resize(source.size());
  const BucketGrid grid(target, cell_size_for(target));
  for (std::size_t i = 0; i < source.size(); ++i) {
    const std::uint32_t j = grid.nearest(source[i]);
    map.target[i] = j;
    map.displacement[i] = distance(source[i], target[j]);
  }
  return map;
}

double sup_deviation(const TransportMap& map) {
  double s = 0.0;
  for (double d : map.displacement) s = std::max(s, d);
  return s;
}

double stagnation_cost(const TransportMap& map, std::span<const double> masses) {
  if (masses.size() != map.displacement.size()) throw InputError("stagnation_cost: mass count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) s += masses[i] * map.displacement[i] * map.displacement[i];
  return s;
}

std::vector<double> pushforward(const TransportMap& map, std::span<const double> masses,
                                std::size_t target_count) {
  if (masses.size() != map.target.size()) throw InputError("pushforward: mass count mismatch");
  std::vector<double> out(target_count, 0.0);
  for (std::size_t i = 0; i < masses.size(); ++i) out.at(map.target[i]) += masses[i];
  return out;
}

double directed_hausdorff(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw InputError("hausdorff: empty point set");
  if (a.dim() != b.dim()) throw InputError("hausdorff: dimension mismatch");
  const BucketGrid grid(b, cell_size_for(b));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, distance(a[i], b[grid.nearest(a[i])]));
  return s;
}

double hausdorff_finite(const PointCloud& a, const PointCloud& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

PointCloud discretize_closure(const Domain& region, double delta) {
  if (!(delta > 0.0)) throw InputError("discretize_closure: delta must be positive");
  const Box box = region.bounding_box();
  const int d = static_cast<int>(box.lo.size());
  PointCloud out(d);
  std::vector<std::size_t> counts(d);
  std::size_t total = 1;
  for (int c = 0; c < d; ++c) {
    counts[c] = static_cast<std::size_t>(std::floor((box.hi[c] - box.lo[c]) / delta)) + 1;
    total *= counts[c];
  }
  if (total > 50'000'000) throw InputError("discretize_closure: delta too small for the region");
  std::vector<double> x(d);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t t = 0; t < total; ++t) {
    std::size_t r = t;
    for (int c = 0; c < d; ++c) {
      idx[c] = r % counts[c];
      r /= counts[c];
      x[c] = box.lo[c] + static_cast<double>(idx[c]) * delta;
    }
    if (region.contains(x)) out.push_back(x);
  }
  const PointCloud edge = region.boundary_samples(delta);
  for (std::size_t i = 0; i < edge.size(); ++i) out.push_back(edge[i]);
  if (out.empty()) throw InputError("discretize_closure: region discretizes to an empty set");
  return out;
}

RegionDistance hausdorff_to_region(const PointCloud& a, const Domain& region, double delta) {
  return hausdorff_to_region(a, discretize_closure(region, delta), delta);
}

RegionDistance hausdorff_to_region(const PointCloud& a, const PointCloud& region_points, double delta) {
  if (!(delta > 0.0)) throw InputError("hausdorff_to_region: delta must be positive");
  if (region_points.empty()) throw InputError("hausdorff_to_region: region discretizes to an empty set");
  return {hausdorff_finite(a, region_points), delta};
}

EmpiricalPair restrict_pair(const EmpiricalPair& pair, const Domain& region) {
  EmpiricalPair out = pair;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (region.contains(out.support[i])) continue;
    std::fill_n(out.values.begin() + static_cast<std::ptrdiff_t>(i * out.k), out.k, 0.0);
  }
  return out;
}

LabelMatch match_parts(const std::vector<PointCloud>& parts, const std::vector<PointCloud>& reference) {
  const std::size_t k = parts.size();
  if (reference.size() != k) throw InputError("match_parts: part counts differ");
  std::vector<double> dist(k * k, kInf);
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t r = 0; r < k; ++r) {
      if (!parts[l].empty() && !reference[r].empty()) dist[l * k + r] = hausdorff_finite(parts[l], reference[r]);
    }
  }
  LabelMatch best;
  best.total = kInf;
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  if (k <= 8) {
    do {
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) s += dist[l * k + perm[l]];
      if (s < best.total || best.permutation.empty()) {
        best.total = s;
        best.permutation = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::vector<std::uint8_t> used_l(k, 0), used_r(k, 0);
    best.permutation.assign(k, 0);
    best.total = 0.0;
    for (std::size_t step = 0; step < k; ++step) {
      std::size_t bl = k, br = k;
      double bd = kInf;
      for (std::size_t l = 0; l < k; ++l) {
        if (used_l[l]) continue;
        for (std::size_t r = 0; r < k; ++r) {
          if (used_r[r]) continue;
          if (bl == k || dist[l * k + r] < bd) {
            bd = dist[l * k + r];
            bl = l;
            br = r;
          }
        }
      }
      used_l[bl] = used_r[br] = 1;
      best.permutation[bl] = br;
      best.total += bd;
    }
  }
  best.distances.resize(k);
  for (std::size_t l = 0; l < k; ++l) best.distances[l] = dist[l * k + best.permutation[l]];
  return best;
}

}  // namespace dirpart
