#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dirpart/domain.hpp"
#include "dirpart/kernels.hpp"
#include "dirpart/point_cloud.hpp"

namespace dirpart {

struct Neighbor {
  std::uint32_t index;
  double weight;
};

/// Weighted graph on a point cloud with symmetric nonnegative weights stored
/// in compressed rows (ascending neighbor index, self-loops allowed), an
/// admissible-vertex mask and a per-vertex measure.
///
/// Degrees exclude self-loops so that self-loops never affect an energy.
class GeometricGraph {
 public:
  struct Triplet {
    std::uint32_t i;
    std::uint32_t j;
    double w;
  };

  GeometricGraph() = default;

  /// Builds from unordered pairs (i <= j); each off-diagonal pair is stored in
  /// both rows. Throws InputError on out-of-range indices or negative weights.
  GeometricGraph(PointCloud points, std::size_t n, std::vector<Triplet> pairs,
                 std::vector<std::uint8_t> admissible, std::vector<double> mass, double eps,
                 std::string kernel);

  std::size_t size() const noexcept { return n_; }
  int dim() const noexcept { return dim_; }
  const PointCloud& points() const noexcept { return points_; }
  double eps() const noexcept { return eps_; }
  const std::string& kernel() const noexcept { return kernel_; }
  std::uint64_t id() const noexcept { return id_; }

  std::span<const Neighbor> neighbors(std::size_t i) const {
    return {adj_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t edge_entries() const noexcept { return adj_.size(); }

  /// Sum_{j != i} W_ij.
  double degree(std::size_t i) const { return degree_[i]; }
  const std::vector<double>& degrees() const noexcept { return degree_; }

  bool admissible(std::size_t i) const { return admissible_[i] != 0; }
  const std::vector<std::uint8_t>& admissible_mask() const noexcept { return admissible_; }
  std::size_t admissible_count() const;

  double mass(std::size_t i) const { return mass_[i]; }
  const std::vector<double>& masses() const noexcept { return mass_; }

  /// Returns a copy with W_ii set to `w` for every vertex (for testing invariance).
  GeometricGraph with_self_loops(double w) const;

  /// Returns a copy carrying vertex coordinates (graph files store none).
  GeometricGraph with_points(PointCloud points) const;

 private:
  void compute_id();

  PointCloud points_;
  std::size_t n_ = 0;
  int dim_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adj_;
  std::vector<double> degree_;
  std::vector<std::uint8_t> admissible_;
  std::vector<double> mass_;
  double eps_ = 0.0;
  std::string kernel_;
  std::uint64_t id_ = 0;
};

/// n x k row-major array of vertex values.
struct VertexField {
  std::size_t n = 0;
  std::size_t k = 1;
  std::vector<double> values;
  std::uint64_t graph_id = 0;

  VertexField() = default;
  VertexField(std::size_t rows, std::size_t cols, std::uint64_t gid = 0)
      : n(rows), k(cols), values(rows * cols, 0.0), graph_id(gid) {}
  static VertexField from_column(std::vector<double> column, std::uint64_t gid = 0);

  double& at(std::size_t i, std::size_t l) { return values[i * k + l]; }
  double at(std::size_t i, std::size_t l) const { return values[i * k + l]; }
  std::vector<double> column(std::size_t l) const;
  void set_column(std::size_t l, std::span<const double> col);

  /// At most one nonzero entry per row.
  bool in_sigma_k() const;
};

/// Connects all pairs within r* eps with weight eps^{-d} eta(|x_i - x_j| / eps).
GeometricGraph build_graph(const SampleSet& samples, const KernelProfile& profile, double eps);

/// Dense O(n^2) construction used as a reference.
GeometricGraph build_graph_dense(const SampleSet& samples, const KernelProfile& profile, double eps);

/// sum_{i,j} W_ij (u_i - u_j)^2 over ordered pairs.
double scalar_energy(const GeometricGraph& g, std::span<const double> u);

/// sum_{i,j} W_ij (u_i / sqrt(D_i) - u_j / sqrt(D_j))^2.
double normalized_energy(const GeometricGraph& g, std::span<const double> u);

/// (1 / (n^2 eps^2)) sum over columns of scalar_energy.
double dirichlet_energy(const GeometricGraph& g, const VertexField& u, double eps);

/// sqrt(sum_i m_i u_i^2).
double nu_norm(const GeometricGraph& g, std::span<const double> u);

/// Graph file: header `n d eps kernel`, then `i m_i mask_i count_i j1 w1 ...`.
void write_graph(std::ostream& os, const GeometricGraph& g);
GeometricGraph read_graph(std::istream& is);

}  // namespace dirpart
