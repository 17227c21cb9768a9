#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dirpart/domain.hpp"
#include "dirpart/geograph.hpp"

namespace dirpart {

// ---------------------------------------------------------------------------
// Exact partitions of the unit interval
// ---------------------------------------------------------------------------

struct IntervalPartition {
  std::size_t k = 1;
  std::vector<double> lengths;      // t_1 .. t_k
  std::vector<double> breakpoints;  // the k - 1 interior cut points
  double objective = 0.0;
  /// Set for the Zaremba k = 1 case: the pure Neumann interval, kappa_1 = 0.
  bool degenerate = false;
};

/// Sum of pi^2 / t_l^2.
double interval_dirichlet_objective(std::span<const double> lengths);
/// pi^2 (1/(4 t_1^2) + sum_{1<l<k} 1/t_l^2 + 1/(4 t_k^2)).
double interval_zaremba_objective(std::span<const double> lengths);

/// Equipartition, objective pi^2 k^3.
IntervalPartition interval_dirichlet(std::size_t k);

/// End pieces 1/(2 + (k-2) 4^{1/3}), interior pieces 4^{1/3} times longer.
IntervalPartition interval_zaremba(std::size_t k);

// ---------------------------------------------------------------------------
// Five-point finite-difference grids as graphs
// ---------------------------------------------------------------------------

enum class GridBoundary {
  kDirichlet,  // nodal grid, zero on a ghost layer around the region
  kZaremba,    // cell-centred grid, natural (Neumann) outer boundary
};

/// An nx-by-ny grid of spacing h anchored at `origin`. The Dirichlet layout
/// puts nodes at origin + (i h, j h), 0 <= i <= nx; the Zaremba layout puts
/// them at cell centres. A node belongs to the problem when it lies in
/// `region` (default: the open rectangle spanned by the grid).
struct GridProblem {
  std::size_t nx = 200;
  std::size_t ny = 200;
  double h = 1.0 / 200.0;
  std::array<double, 2> origin{0.0, 0.0};
  std::optional<Domain> region;
  GridBoundary boundary = GridBoundary::kDirichlet;

  static GridProblem unit_square(std::size_t n, GridBoundary boundary);
  /// Square grid over `box` (2D) restricted to `region`.
  static GridProblem masked(const Domain& region, const Box& box, std::size_t n, GridBoundary boundary);

  std::size_t nodes_x() const { return boundary == GridBoundary::kDirichlet ? nx + 1 : nx; }
  std::size_t nodes_y() const { return boundary == GridBoundary::kDirichlet ? ny + 1 : ny; }
  std::array<double, 2> node(std::size_t i, std::size_t j) const;
  bool inside(std::size_t i, std::size_t j) const;
};

struct GridGraph {
  GeometricGraph graph;
  /// Raster position (i, j) of every graph vertex.
  std::vector<std::array<std::uint32_t, 2>> cell;
  std::size_t nodes_x = 0;
  std::size_t nodes_y = 0;
  double h = 0.0;
};

/// Vertices are the region nodes (plus, for Dirichlet, the non-admissible
/// ghost layer). Each grid edge contributes (u_i - u_j)^2 to the double-sum
/// energy and every vertex has mass 1, so Rayleigh quotients are the
/// five-point eigenvalues of the continuum Laplacian.
GridGraph grid_graph(const GridProblem& problem);

/// nodes_y rows of nodes_x labels, 1-based parts, 0 for nodes outside the
/// problem or unassigned. Row 0 is the lowest y.
std::vector<std::vector<int>> label_raster(const GridGraph& grid, std::span<const int> labels);

// ---------------------------------------------------------------------------
// Continuum Dirichlet energy
// ---------------------------------------------------------------------------

using ScalarField = std::function<double(std::span<const double>)>;

/// int_domain |grad u|^2 rho^2 dx by refined tensor-product Gauss-Legendre
/// quadrature (polar coordinates for disks and polar stars), with gradients
/// by central differences. Throws NumericError if `rel_tol` is not reached.
double continuum_energy(const ScalarField& u, const Domain& domain, const ScalarField& density,
                        double rel_tol = 1e-6);
double continuum_energy(const ScalarField& u, const Domain& domain, double density,
                        double rel_tol = 1e-6);

/// int_domain f dx by the same quadrature.
double integrate(const ScalarField& f, const Domain& domain, double rel_tol = 1e-8);

}  // namespace dirpart
