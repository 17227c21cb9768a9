#include "dirpart/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dirpart/errors.hpp"

namespace dirpart {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct GaussRule {
  std::vector<double> nodes;  // on [0, 1]
  std::vector<double> weights;
};

// Gauss-Legendre by Newton iteration on P_q.
GaussRule gauss_legendre(int q) {
  GaussRule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= q; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussRule& rule8() {
  static const GaussRule r = gauss_legendre(8);
  return r;
}

// Composite rule with `panels` panels on [lo, hi].
void composite(double lo, double hi, std::size_t panels, std::vector<double>& x, std::vector<double>& w) {
  const auto& r = rule8();
  x.clear();
  w.clear();
  const double len = (hi - lo) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      x.push_back(lo + len * (p + r.nodes[i]));
      w.push_back(len * r.weights[i]);
    }
  }
}

double integrate_at_level(const ScalarField& f, const Domain& domain, std::size_t panels) {
  std::vector<double> x, w;
  return std::visit(
      Overloaded{
          [&](const Interval& s) {
            composite(s.lo, s.hi, panels, x, w);
            double acc = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(std::array{x[i]});
            return acc;
          },
          [&](const Box& s) {
            const std::size_t d = s.lo.size();
            std::vector<std::vector<double>> xs(d), ws(d);
            for (std::size_t a = 0; a < d; ++a) composite(s.lo[a], s.hi[a], panels, xs[a], ws[a]);
            const std::size_t m = xs[0].size();
            std::vector<std::size_t> idx(d, 0);
            std::vector<double> p(d);
            double acc = 0.0;
            while (true) {
              double wt = 1.0;
              for (std::size_t a = 0; a < d; ++a) {
                p[a] = xs[a][idx[a]];
                wt *= ws[a][idx[a]];
              }
              acc += wt * f(p);
              std::size_t a = 0;
              while (a < d && ++idx[a] == m) idx[a++] = 0;
              if (a == d) break;
            }
            return acc;
          },
          [&](const Disk& s) {
            std::vector<double> th, wth, rr, wr;
            composite(0.0, 2.0 * kPi, 2 * panels, th, wth);
            composite(0.0, s.radius, panels, rr, wr);
            double acc = 0.0;
            for (std::size_t a = 0; a < th.size(); ++a) {
              for (std::size_t b = 0; b < rr.size(); ++b) {
                const std::array p{s.center[0] + rr[b] * std::cos(th[a]), s.center[1] + rr[b] * std::sin(th[a])};
                acc += wth[a] * wr[b] * rr[b] * f(p);
              }
            }
            return acc;
          },
          [&](const PolarStar& s) {
            std::vector<double> th, wth, rr, wr;
            composite(0.0, 2.0 * kPi, 2 * panels * std::max(1, s.m), th, wth);
            double acc = 0.0;
            for (std::size_t a = 0; a < th.size(); ++a) {
              composite(0.0, s.radius_at(th[a]), panels, rr, wr);
              for (std::size_t b = 0; b < rr.size(); ++b) {
                const std::array p{s.center[0] + rr[b] * std::cos(th[a]), s.center[1] + rr[b] * std::sin(th[a])};
                acc += wth[a] * wr[b] * rr[b] * f(p);
              }
            }
            return acc;
          },
      },
      domain.shape());
}

}  // namespace

double interval_dirichlet_objective(std::span<const double> lengths) {
  double s = 0.0;
  for (double t : lengths) s += 1.0 / (t * t);
  return kPi * kPi * s;
}

double interval_zaremba_objective(std::span<const double> lengths) {
  const std::size_t k = lengths.size();
  if (k == 0) return 0.0;
  if (k == 1) return 0.0;
  double s = 0.0;
  for (std::size_t l = 0; l < k; ++l) {
    const double t = lengths[l];
    s += (l == 0 || l + 1 == k ? 0.25 : 1.0) / (t * t);
  }
  return kPi * kPi * s;
}

namespace {

IntervalPartition from_lengths(std::vector<double> lengths) {
  IntervalPartition p;
  p.k = lengths.size();
  double acc = 0.0;
  for (std::size_t l = 0; l + 1 < lengths.size(); ++l) {
    acc += lengths[l];
    p.breakpoints.push_back(acc);
  }
  p.lengths = std::move(lengths);
  return p;
}

}  // namespace

IntervalPartition interval_dirichlet(std::size_t k) {
  if (k < 1) throw InputError("interval_dirichlet: k must be >= 1");
  IntervalPartition p = from_lengths(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  for (std::size_t l = 0; l + 1 < k; ++l) p.breakpoints[l] = static_cast<double>(l + 1) / k;
  p.objective = interval_dirichlet_objective(p.lengths);
  return p;
}

IntervalPartition interval_zaremba(std::size_t k) {
  if (k < 1) throw InputError("interval_zaremba: k must be >= 1");
  if (k == 1) {
    IntervalPartition p = from_lengths({1.0});
    p.objective = 0.0;
    p.degenerate = true;
    return p;
  }
  const double c = std::cbrt(4.0);
  const double denom = 2.0 + static_cast<double>(k - 2) * c;
  std::vector<double> lengths(k, c / denom);
  lengths.front() = lengths.back() = 1.0 / denom;
  IntervalPartition p = from_lengths(std::move(lengths));
  p.objective = interval_zaremba_objective(p.lengths);
  return p;
}

GridProblem GridProblem::unit_square(std::size_t n, GridBoundary boundary) {
  GridProblem g;
  g.nx = g.ny = n;
  g.h = 1.0 / static_cast<double>(n);
  g.boundary = boundary;
  return g;
}

GridProblem GridProblem::masked(const Domain& region, const Box& box, std::size_t n, GridBoundary boundary) {
  if (region.dim() != 2 || box.lo.size() != 2) throw InputError("GridProblem: masked grids are planar");
  GridProblem g;
  const double side = std::max(box.hi[0] - box.lo[0], box.hi[1] - box.lo[1]);
  g.nx = g.ny = n;
  g.h = side / static_cast<double>(n);
  g.origin = {box.lo[0], box.lo[1]};
  g.region = region;
  g.boundary = boundary;
  return g;
}

std::array<double, 2> GridProblem::node(std::size_t i, std::size_t j) const {
  const double off = boundary == GridBoundary::kDirichlet ? 0.0 : 0.5;
  return {origin[0] + (static_cast<double>(i) + off) * h, origin[1] + (static_cast<double>(j) + off) * h};
}

bool GridProblem::inside(std::size_t i, std::size_t j) const {
  if (region) return region->contains(node(i, j));
  if (boundary == GridBoundary::kZaremba) return i < nx && j < ny;
  return 0 < i && i < nx && 0 < j && j < ny;
}

GridGraph grid_graph(const GridProblem& problem) {
  if (!(problem.h > 0.0)) throw InputError("grid_graph: spacing must be positive");
  const std::size_t mx = problem.nodes_x();
  const std::size_t my = problem.nodes_y();
  const bool dirichlet = problem.boundary == GridBoundary::kDirichlet;

  // 1 = region node, 2 = ghost, 0 = absent.
  std::vector<std::uint8_t> kind(mx * my, 0);
  for (std::size_t j = 0; j < my; ++j) {
    for (std::size_t i = 0; i < mx; ++i) kind[j * mx + i] = problem.inside(i, j) ? 1 : 0;
  }
  if (dirichlet) {
    for (std::size_t j = 0; j < my; ++j) {
      for (std::size_t i = 0; i < mx; ++i) {
        if (kind[j * mx + i] != 0) continue;
        const bool touches = (i > 0 && kind[j * mx + i - 1] == 1) || (i + 1 < mx && kind[j * mx + i + 1] == 1) ||
                             (j > 0 && kind[(j - 1) * mx + i] == 1) || (j + 1 < my && kind[(j + 1) * mx + i] == 1);
        if (touches) kind[j * mx + i] = 2;
      }
    }
  }

  GridGraph out;
  out.nodes_x = mx;
  out.nodes_y = my;
  out.h = problem.h;
  std::vector<std::int64_t> vid(mx * my, -1);
  PointCloud points(2);
  std::vector<std::uint8_t> admissible;
  for (std::size_t j = 0; j < my; ++j) {
    for (std::size_t i = 0; i < mx; ++i) {
      if (kind[j * mx + i] == 0) continue;
      vid[j * mx + i] = static_cast<std::int64_t>(out.cell.size());
      out.cell.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      points.push_back(problem.node(i, j));
      admissible.push_back(kind[j * mx + i] == 1 ? 1 : 0);
    }
  }
  const std::size_t n = out.cell.size();
  if (admissible.empty() || std::count(admissible.begin(), admissible.end(), 1) == 0) {
    throw InputError("grid_graph: region mask is empty");
  }
  std::vector<GeometricGraph::Triplet> pairs;
  const double w = 0.5 / (problem.h * problem.h);
  auto link = [&](std::size_t a, std::size_t b) {
    if (vid[a] < 0 || vid[b] < 0) return;
    if (kind[a] == 2 && kind[b] == 2) return;
    pairs.push_back({static_cast<std::uint32_t>(vid[a]), static_cast<std::uint32_t>(vid[b]), w});
  };
  for (std::size_t j = 0; j < my; ++j) {
    for (std::size_t i = 0; i < mx; ++i) {
      if (i + 1 < mx) link(j * mx + i, j * mx + i + 1);
      if (j + 1 < my) link(j * mx + i, (j + 1) * mx + i);
    }
  }
  std::vector<double> mass(n, 1.0);
  out.graph = GeometricGraph(std::move(points), n, std::move(pairs), std::move(admissible), std::move(mass),
                             problem.h, "grid5");
  return out;
}

std::vector<std::vector<int>> label_raster(const GridGraph& grid, std::span<const int> labels) {
  if (labels.size() != grid.cell.size()) throw InputError("label_raster: label count mismatch");
  std::vector<std::vector<int>> raster(grid.nodes_y, std::vector<int>(grid.nodes_x, 0));
  for (std::size_t v = 0; v < labels.size(); ++v) {
    raster[grid.cell[v][1]][grid.cell[v][0]] = labels[v] < 0 ? 0 : labels[v] + 1;
  }
  return raster;
}

double integrate(const ScalarField& f, const Domain& domain, double rel_tol) {
  const std::size_t max_panels = domain.dim() == 1 ? 4096 : (domain.dim() == 2 ? 64 : 8);
  double prev = integrate_at_level(f, domain, 1);
  for (std::size_t panels = 2; panels <= max_panels; panels *= 2) {
    const double cur = integrate_at_level(f, domain, panels);
    const double scale = std::max(std::abs(cur), std::abs(prev));
    if (std::abs(cur - prev) <= rel_tol * scale + 1e-15) return cur;
    prev = cur;
  }
  throw NumericError("integrate: quadrature did not reach the requested tolerance", rel_tol);
}

double continuum_energy(const ScalarField& u, const Domain& domain, const ScalarField& density,
                        double rel_tol) {
  const int d = domain.dim();
  auto integrand = [&](std::span<const double> x) {
    std::vector<double> p(x.begin(), x.end());
    double g2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double step = 1e-5 * std::max(1.0, std::abs(x[a]));
      p[a] = x[a] + step;
      const double up = u(p);
      p[a] = x[a] - step;
      const double dn = u(p);
      p[a] = x[a];
      const double g = (up - dn) / (2.0 * step);
      g2 += g * g;
    }
    const double rho = density(x);
    return g2 * rho * rho;
  };
  const double value = integrate(integrand, domain, rel_tol);
  return value < 1e-20 ? 0.0 : value;
}

double continuum_energy(const ScalarField& u, const Domain& domain, double density, double rel_tol) {
  return continuum_energy(u, domain, [density](std::span<const double>) { return density; }, rel_tol);
}

}  // namespace dirpart
