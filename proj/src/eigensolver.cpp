#include "dirpart/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "dirpart/errors.hpp"
#include "dirpart/random.hpp"

namespace dirpart {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

constexpr double kRegularization = 1e-12;

struct LocalProblem {
  std::vector<std::uint32_t> support;  // local -> global
  std::vector<std::int32_t> local;     // global -> local or -1
  SpMat op;                            // restricted operator (symmetric)
  Vec mass;
  double op_norm = 0.0;                // max absolute row sum
};

LocalProblem assemble(const RestrictedForm& form) {
  const GeometricGraph& g = *form.graph;
  LocalProblem p;
  p.support = form.effective_support();
  const auto s = static_cast<Eigen::Index>(p.support.size());
  p.local.assign(g.size(), -1);
  for (std::size_t a = 0; a < p.support.size(); ++a) p.local[p.support[a]] = static_cast<std::int32_t>(a);

  const bool normalized = form.kind == LaplacianKind::kNormalized;
  std::vector<double> inv_sqrt_deg;
  if (normalized) {
    inv_sqrt_deg.resize(p.support.size());
    for (std::size_t a = 0; a < p.support.size(); ++a) {
      const double d = g.degree(p.support[a]);
      if (!(d > 0.0)) {
        throw InputError("normalized form: vertex " + std::to_string(p.support[a]) +
                         " in the support has zero degree");
      }
      inv_sqrt_deg[a] = 1.0 / std::sqrt(d);
    }
  }

  std::vector<Eigen::Triplet<double>> trip;
  p.mass.resize(s);
  std::vector<double> row_abs(p.support.size(), 0.0);
  for (std::size_t a = 0; a < p.support.size(); ++a) {
    const std::uint32_t i = p.support[a];
    p.mass[static_cast<Eigen::Index>(a)] = g.mass(i);
    const double diag = normalized ? 2.0 : 2.0 * g.degree(i);
    trip.emplace_back(a, a, diag);
    row_abs[a] += std::abs(diag);
    for (const auto& nb : g.neighbors(i)) {
      if (nb.index == i) continue;
      const std::int32_t b = p.local[nb.index];
      if (b < 0) continue;
      const double w = normalized ? -2.0 * nb.weight * inv_sqrt_deg[a] * inv_sqrt_deg[b] : -2.0 * nb.weight;
      trip.emplace_back(a, b, w);
      row_abs[a] += std::abs(w);
    }
  }
  p.op.resize(s, s);
  p.op.setFromTriplets(trip.begin(), trip.end());
  p.op_norm = row_abs.empty() ? 0.0 : *std::max_element(row_abs.begin(), row_abs.end());
  return p;
}

std::size_t count_components(const GeometricGraph& g, const LocalProblem& p) {
  std::vector<std::uint8_t> seen(p.support.size(), 0);
  std::vector<std::uint32_t> stack;
  std::size_t comps = 0;
  for (std::size_t a = 0; a < p.support.size(); ++a) {
    if (seen[a]) continue;
    ++comps;
    seen[a] = 1;
    stack.push_back(static_cast<std::uint32_t>(a));
    while (!stack.empty()) {
      const std::uint32_t c = stack.back();
      stack.pop_back();
      for (const auto& nb : g.neighbors(p.support[c])) {
        const std::int32_t b = p.local[nb.index];
        if (b >= 0 && nb.weight > 0.0 && !seen[b]) {
          seen[b] = 1;
          stack.push_back(static_cast<std::uint32_t>(b));
        }
      }
    }
  }
  return comps;
}

/// Solves (op + shift I) Y = B column by column.
class ShiftedSolver {
 public:
  ShiftedSolver(const SpMat& op, double shift, InnerSolver kind) : op_(op), shift_(shift), kind_(kind) {
    if (kind_ == InnerSolver::kCholesky) {
      SpMat shifted = op;
      for (Eigen::Index i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) += shift;
      ldlt_.compute(shifted);
      if (ldlt_.info() != Eigen::Success) throw NumericError("eigensolver: LDL^T factorization failed");
    } else {
      inv_diag_ = op.diagonal().array() + shift;
      inv_diag_ = inv_diag_.cwiseInverse();
    }
  }

  Mat solve(const Mat& rhs, const Mat& guess) const {
    if (kind_ == InnerSolver::kCholesky) return ldlt_.solve(rhs);
    Mat out(rhs.rows(), rhs.cols());
    for (Eigen::Index c = 0; c < rhs.cols(); ++c) out.col(c) = cg(rhs.col(c), guess.col(c));
    return out;
  }

 private:
  Vec apply(const Vec& x) const { return op_ * x + shift_ * x; }

  Vec cg(const Vec& b, const Vec& x0) const {
    const double bnorm = b.norm();
    if (bnorm == 0.0) return Vec::Zero(b.size());
    Vec x = x0;
    Vec r = b - apply(x);
    Vec z = inv_diag_.cwiseProduct(r);
    Vec p = z;
    double rz = r.dot(z);
    const auto max_iter = std::max<Eigen::Index>(100, 20 * b.size());
    for (Eigen::Index it = 0; it < max_iter && r.norm() > 1e-14 * bnorm; ++it) {
      const Vec ap = apply(p);
      const double alpha = rz / p.dot(ap);
      x += alpha * p;
      r -= alpha * ap;
      z = inv_diag_.cwiseProduct(r);
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    return x;
  }

  const SpMat& op_;
  double shift_;
  InnerSolver kind_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  Vec inv_diag_;
};

/// Mass-weighted modified Gram-Schmidt; drops numerically dependent columns.
Mat m_orthonormalize(const Mat& y, const Vec& mass) {
  Mat q(y.rows(), y.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    Vec v = y.col(c);
    const double orig = std::sqrt(v.cwiseProduct(mass).dot(v));
    if (!(orig > 0.0) || !std::isfinite(orig)) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < kept; ++j) v -= q.col(j).cwiseProduct(mass).dot(v) * q.col(j);
    }
    const double nrm = std::sqrt(v.cwiseProduct(mass).dot(v));
    if (nrm <= 1e-10 * orig) continue;
    q.col(kept++) = v / nrm;
  }
  return q.leftCols(kept);
}

}  // namespace

std::vector<std::uint32_t> RestrictedForm::effective_support() const {
  if (graph == nullptr) throw InputError("RestrictedForm: no graph");
  std::vector<std::uint32_t> out;
  out.reserve(subset.size());
  for (std::uint32_t v : subset) {
    if (v >= graph->size()) throw InputError("RestrictedForm: vertex index out of range");
    if (!constrain_inadmissible || graph->admissible(v)) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

EigenResult smallest_eigenpair(const RestrictedForm& form, const EigenOptions& options) {
  if (!(options.tol > 0.0)) throw InputError("smallest_eigenpair: tol must be positive");
  const GeometricGraph& g = *form.graph;
  const LocalProblem p = assemble(form);
  const auto s = static_cast<Eigen::Index>(p.support.size());

  EigenResult result;
  result.vector.assign(g.size(), 0.0);
  if (s == 0) return result;
  result.components = count_components(g, p);

  auto finish = [&](const Vec& x, std::size_t iterations, double residual) {
    // Absolute values: on each component the eigenvector has one sign.
    Vec u = x.cwiseAbs();
    const double nrm = std::sqrt(u.cwiseProduct(p.mass).dot(u));
    u /= nrm;
    for (Eigen::Index a = 0; a < s; ++a) result.vector[p.support[a]] = u[a];
    result.value = u.dot(p.op * u);
    result.iterations = iterations;
    result.residual = residual;
    return result;
  };

  if (s == 1) {
    Vec x(1);
    x[0] = 1.0;
    return finish(x, 0, 0.0);
  }

  const Eigen::Index b = std::min<Eigen::Index>(std::max<std::size_t>(options.block_size, 1), s);
  Mat x(s, b);
  {
    std::uint64_t h = g.id();
    for (std::uint32_t v : p.support) h = hash_combine(h, v);
    Rng rng(h);
    for (Eigen::Index a = 0; a < s; ++a) x(a, 0) = 0.5 + rng.uniform();
    for (Eigen::Index c = 1; c < b; ++c) {
      for (Eigen::Index a = 0; a < s; ++a) x(a, c) = rng.uniform(-1.0, 1.0);
    }
    if (!options.initial_guess.empty()) {
      if (options.initial_guess.size() != g.size()) throw InputError("smallest_eigenpair: initial guess size mismatch");
      Vec guess(s);
      for (Eigen::Index a = 0; a < s; ++a) guess[a] = std::abs(options.initial_guess[p.support[a]]);
      if (guess.norm() > 0.0) x.col(0) = guess + 1e-3 * guess.norm() / std::sqrt(double(s)) * x.col(0);
    }
  }
  x = m_orthonormalize(x, p.mass);

  const double op_norm = std::max(p.op_norm, 1e-300);
  const double shift = kRegularization * std::max(p.op.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  const ShiftedSolver solver(p.op, shift, options.inner);

  Vec best = x.col(0);
  double best_res = std::numeric_limits<double>::infinity();
  double best_theta = 0.0;
  for (std::size_t it = 1; it <= options.maxit; ++it) {
    Mat rhs = p.mass.asDiagonal() * x;
    Mat y = solver.solve(rhs, x);
    y = m_orthonormalize(y, p.mass);
    if (y.cols() == 0) throw NumericError("eigensolver: iteration collapsed");
    const Mat ay = p.op * y;
    Mat h = y.transpose() * ay;
    h = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> ritz(h);
    x = y * ritz.eigenvectors();
    const double theta = ritz.eigenvalues()[0];
    const Vec x0 = x.col(0);
    const Vec r = ay * ritz.eigenvectors().col(0) - theta * p.mass.cwiseProduct(x0);
    const double res = r.norm() / (op_norm * x0.norm());
    if (res < best_res) {
      best_res = res;
      best = x0;
      best_theta = theta;
    }
    if (res <= options.tol) return finish(x0, it, res);
  }
  std::vector<double> full(g.size(), 0.0);
  {
    Vec u = best.cwiseAbs();
    u /= std::sqrt(u.cwiseProduct(p.mass).dot(u));
    for (Eigen::Index a = 0; a < s; ++a) full[p.support[a]] = u[a];
  }
  throw ConvergenceError("eigensolver: no convergence after " + std::to_string(options.maxit) +
                             " iterations (residual " + std::to_string(best_res) + ")",
                         best_res, best_theta, std::move(full));
}

double lambda1_subset(const GeometricGraph& graph, std::span<const std::uint32_t> subset,
                      LaplacianKind kind, bool constrain_inadmissible) {
  RestrictedForm form{&graph, {subset.begin(), subset.end()}, kind, constrain_inadmissible};
  return smallest_eigenpair(form).value;
}

}  // namespace dirpart
