#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dirpart {

/// Flat row-major storage of n points in R^d.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(int dim) : dim_(dim) {}
  PointCloud(int dim, std::vector<double> coords);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ > 0 ? coords_.size() / dim_ : 0; }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<double> operator[](std::size_t i) {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }

  void push_back(std::span<const double> p);
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  const std::vector<double>& coords() const noexcept { return coords_; }

  bool operator==(const PointCloud&) const = default;

 private:
  int dim_ = 0;
  std::vector<double> coords_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

}  // namespace dirpart
