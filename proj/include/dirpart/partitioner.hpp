#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dirpart/eigensolver.hpp"
#include "dirpart/geograph.hpp"

namespace dirpart {

enum class PartitionMode {
  kDirichlet,  // non-admissible vertices are held at zero
  kZaremba,    // no outer constraint; every vertex is assignable
};

PartitionMode parse_mode(const std::string& name);  // dirichlet | zaremba
std::string mode_name(PartitionMode mode);

struct SolverConfig {
  std::size_t k = 2;
  PartitionMode mode = PartitionMode::kDirichlet;
  LaplacianKind laplacian = LaplacianKind::kUnnormalized;
  std::size_t restarts = 20;
  std::size_t max_iterations = 300;
  std::uint64_t seed = 0;
  double eigen_tol = 1e-8;
  InnerSolver inner = InnerSolver::kCholesky;
};

inline constexpr int kUnassigned = -1;

/// Labels are 0-based part indices; kUnassigned marks vertices held at zero.
struct PartitionState {
  std::vector<int> labels;
  std::vector<EigenResult> eigenpairs;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;

  std::vector<std::uint32_t> part(std::size_t l) const;
  std::vector<double> eigenvalues() const;
};

/// n x k field whose column l is the part-l eigenvector.
struct GroundState {
  VertexField field;
};

struct SolveResult {
  PartitionState best;
  GroundState ground_state;
  std::vector<double> restart_objectives;
  std::vector<std::size_t> restart_iterations;
  std::size_t best_restart = 0;
};

/// Farthest-point seeds among assignable vertices (first seed drawn from
/// (seed, restart)), nearest-seed labels, then per-part eigenpairs.
PartitionState init_partition(const GeometricGraph& graph, const SolverConfig& config,
                              std::size_t restart);

/// Labels with eigenpairs already solved; used by tests and by init_partition.
PartitionState make_state(const GeometricGraph& graph, const SolverConfig& config,
                          std::vector<int> labels, const PartitionState* previous = nullptr);

/// One rearrangement: smooth each part eigenvector one step off its support,
/// relabel by argmax, reseed empty parts, re-solve. A step that would raise
/// the objective is rejected and the previous state is returned converged.
PartitionState rearrange_step(const GeometricGraph& graph, const SolverConfig& config,
                              const PartitionState& state);

/// Best of `restarts` rearrangement runs.
SolveResult solve(const GeometricGraph& graph, const SolverConfig& config);

GroundState assemble_ground_state(const GeometricGraph& graph, const PartitionState& state);

}  // namespace dirpart
