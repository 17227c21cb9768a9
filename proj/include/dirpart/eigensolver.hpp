#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dirpart/geograph.hpp"

namespace dirpart {

enum class LaplacianKind { kUnnormalized, kNormalized };

enum class InnerSolver {
  kCholesky,           // sparse LDL^T of the restricted operator, factored once per solve
  kConjugateGradient,  // matrix-free Jacobi-preconditioned CG
};

/// The Dirichlet quadratic form of a graph restricted to functions supported
/// on `subset`, optionally also forced to vanish on non-admissible vertices.
struct RestrictedForm {
  const GeometricGraph* graph = nullptr;
  std::vector<std::uint32_t> subset;
  LaplacianKind kind = LaplacianKind::kUnnormalized;
  bool constrain_inadmissible = true;

  /// subset intersected with the admissible vertices (when constrained), sorted.
  std::vector<std::uint32_t> effective_support() const;
};

struct EigenOptions {
  double tol = 1e-8;
  std::size_t maxit = 500;
  InnerSolver inner = InnerSolver::kCholesky;
  std::size_t block_size = 3;
  /// Optional full-length starting vector (e.g. the previous eigenvector).
  std::span<const double> initial_guess{};
};

struct EigenResult {
  double value = std::numeric_limits<double>::infinity();
  /// Full-length, zero off the effective support, nonnegative, nu_norm 1.
  std::vector<double> vector;
  std::size_t iterations = 0;
  double residual = 0.0;
  /// Connected components of the effective support.
  std::size_t components = 0;

  bool is_infinite() const { return value == std::numeric_limits<double>::infinity(); }
};

/// Smallest eigenpair of q(u) = lambda * m.u over u supported on the effective
/// support, with q the (unnormalized or normalized) double-sum form. Uses
/// block inverse iteration with Rayleigh-Ritz on a small block.
///
/// An empty effective support gives lambda = +inf and a zero vector. Throws
/// ConvergenceError (carrying the best iterate) after `maxit` iterations.
EigenResult smallest_eigenpair(const RestrictedForm& form, const EigenOptions& options = {});

/// lambda_1(S) with the graph's admissible mask as the standing constraint.
double lambda1_subset(const GeometricGraph& graph, std::span<const std::uint32_t> subset,
                      LaplacianKind kind = LaplacianKind::kUnnormalized,
                      bool constrain_inadmissible = true);

}  // namespace dirpart
