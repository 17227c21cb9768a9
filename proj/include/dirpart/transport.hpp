#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dirpart/domain.hpp"
#include "dirpart/point_cloud.hpp"

namespace dirpart {

/// A discrete probability measure together with a vector-valued function on
/// its support: the pair (mu, f) of a TL^2 space.
struct EmpiricalPair {
  PointCloud support;
  std::vector<double> masses;
  std::size_t k = 1;
  std::vector<double> values;  // n x k, row-major

  std::size_t size() const noexcept { return support.size(); }
  std::span<const double> value(std::size_t i) const { return {values.data() + i * k, k}; }

  /// Throws InputError unless masses are positive, sum to one and sizes agree.
  void validate() const;

  /// Uniform masses 1/n.
  static EmpiricalPair uniform(PointCloud support, std::vector<double> values, std::size_t k);
};

/// Pair file: header `n d k`, then n lines `x_1 .. x_d m f_1 .. f_k`.
void write_pair(std::ostream& os, const EmpiricalPair& pair);
EmpiricalPair read_pair(std::istream& is);

struct PlanEntry {
  std::uint32_t i;
  std::uint32_t j;
  double mass;
};

struct TransportPlan {
  std::vector<PlanEntry> entries;

  /// Largest absolute deviation of the row / column sums from the given marginals.
  double marginal_error(std::span<const double> source, std::span<const double> target) const;
};

enum class TransportMethod { kExact, kEntropic };

struct TransportOptions {
  /// Above n * m entries the exact flow solver is replaced by the entropic one.
  std::size_t exact_cap = 4'000'000;
  /// Regularisation schedule as multiples of the median cost.
  std::vector<double> schedule{1.0, 0.1, 0.01};
  std::size_t max_scaling_iterations = 200'000;
  double marginal_tol = 1e-6;
};

struct TransportResult {
  double distance = 0.0;
  TransportPlan plan;
  TransportMethod method = TransportMethod::kExact;
  /// True when the value comes from the entropic solver.
  bool approximate = false;
  double final_regularization = 0.0;
};

/// Squared TL^2 ground cost |x - y|^2 + |f(x) - g(y)|^2 between support points.
double tl2_cost(const EmpiricalPair& a, std::size_t i, const EmpiricalPair& b, std::size_t j);

/// d_TL2 = sqrt(min over couplings of the integrated ground cost). The exact
/// method uses a linear assignment for uniform equal-size pairs and a
/// successive-shortest-path min-cost flow otherwise; the entropic method runs
/// stabilised matrix scaling along the schedule and reports the primal cost of
/// the rounded plan.
TransportResult tl2_distance(const EmpiricalPair& a, const EmpiricalPair& b,
                             TransportMethod method = TransportMethod::kExact,
                             const TransportOptions& options = {});

/// Min-cost perfect matching on a dense n x n cost matrix (row-major).
/// Returns the column assigned to each row.
std::vector<std::uint32_t> solve_assignment(std::span<const double> cost, std::size_t n);

/// Maps each source point to its nearest target point (ties to the smallest index).
struct TransportMap {
  PointCloud source;
  std::vector<std::uint32_t> target;
  std::vector<double> displacement;  // |x_i - T(x_i)|
};

TransportMap nn_transport_map(const PointCloud& source, const PointCloud& target);
double sup_deviation(const TransportMap& map);
/// sum_i m_i |x_i - T(x_i)|^2.
double stagnation_cost(const TransportMap& map, std::span<const double> masses);
/// Mass pushed to each target when every source carries `masses[i]`.
std::vector<double> pushforward(const TransportMap& map, std::span<const double> masses,
                                std::size_t target_count);

/// sup_{a in A} dist(a, B).
double directed_hausdorff(const PointCloud& a, const PointCloud& b);
double hausdorff_finite(const PointCloud& a, const PointCloud& b);

/// Grid of spacing delta inside the region plus boundary samples at spacing
/// at most delta: a delta-dense subset of the closure.
PointCloud discretize_closure(const Domain& region, double delta);

struct RegionDistance {
  double distance = 0.0;
  double accuracy = 0.0;  // +- bound from the discretisation
};

RegionDistance hausdorff_to_region(const PointCloud& a, const Domain& region, double delta);
RegionDistance hausdorff_to_region(const PointCloud& a, const PointCloud& region_points, double delta);

/// Values multiplied by the indicator of `region`; support and masses unchanged.
EmpiricalPair restrict_pair(const EmpiricalPair& pair, const Domain& region);

struct LabelMatch {
  /// permutation[l] is the reference part matched to part l.
  std::vector<std::size_t> permutation;
  std::vector<double> distances;
  double total = 0.0;
};

/// Matches parts to reference parts minimising the total Hausdorff distance:
/// exhaustive for k <= 8, greedy on the distance matrix beyond.
LabelMatch match_parts(const std::vector<PointCloud>& parts, const std::vector<PointCloud>& reference);

}  // namespace dirpart
