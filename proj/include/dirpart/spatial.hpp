#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "dirpart/point_cloud.hpp"

namespace dirpart {

/// Uniform bucket grid over a point cloud with a fixed cell size. Cells are
/// hashed so the grid works in any dimension and for unbounded extents.
class BucketGrid {
 public:
  BucketGrid(const PointCloud& points, double cell_size);

  double cell_size() const noexcept { return cell_; }

  /// Calls fn(j) for every indexed point with |p_j - q| <= radius.
  void for_each_within(std::span<const double> q, double radius,
                       const std::function<void(std::uint32_t)>& fn) const;

  /// Index of the nearest indexed point (ties to the smallest index).
  std::uint32_t nearest(std::span<const double> q) const;

 private:
  std::uint64_t key_of(std::span<const std::int64_t> cell) const;
  void cell_of(std::span<const double> q, std::span<std::int64_t> cell) const;
  const std::vector<std::uint32_t>* bucket(std::span<const std::int64_t> cell) const;

  const PointCloud& points_;
  double cell_;
  int dim_;
  std::vector<std::int64_t> lo_;
  std::vector<std::int64_t> hi_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

}  // namespace dirpart
