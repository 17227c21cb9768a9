#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dirpart/point_cloud.hpp"

namespace dirpart {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

struct Disk {
  std::array<double, 2> center{0.0, 0.0};
  double radius = 1.0;
};

/// Star-shaped planar region r < R(theta) = c0 + c1 cos(m theta) around `center`.
struct PolarStar {
  std::array<double, 2> center{0.0, 0.0};
  double c0 = 1.0;
  double c1 = 0.3;
  int m = 3;

  double radius_at(double theta) const;
};

/// An open sampling region. Membership on the boundary counts as outside.
class Domain {
 public:
  using Shape = std::variant<Interval, Box, Disk, PolarStar>;

  static Domain interval(double lo, double hi);
  static Domain box(std::vector<double> lo, std::vector<double> hi);
  static Domain square(double lo, double hi, int dim = 2);
  static Domain disk(std::array<double, 2> center, double radius);
  static Domain polar_star(double c0, double c1, int m, std::array<double, 2> center = {0.0, 0.0});

  int dim() const noexcept { return dim_; }
  const Shape& shape() const noexcept { return shape_; }

  /// Open-set membership; throws InputError on a dimension mismatch.
  bool contains(std::span<const double> x) const;

  /// Lebesgue measure. The polar star uses adaptive quadrature of (1/2) int R^2.
  double area() const;

  /// Axis-aligned bounding box (closed).
  Box bounding_box() const;

  /// Diameter of the bounding box.
  double diameter() const;

  /// Points on the topological boundary at arc spacing at most `spacing` (d <= 2).
  PointCloud boundary_samples(double spacing) const;

  std::string describe() const;

 private:
  Domain(Shape shape, int dim) : shape_(std::move(shape)), dim_(dim) {}

  Shape shape_;
  int dim_ = 0;
};

enum class Density { kUniform };

/// Auxiliary domain `outer` (Omega) containing the domain of interest `inner` (U).
struct SamplingSpace {
  Domain outer;
  Domain inner;
  Density density = Density::kUniform;

  /// Validates containment on a probe grid; throws ConfigError.
  static SamplingSpace make(Domain outer, Domain inner);

  /// Omega = U, as used for Zaremba partitions.
  static SamplingSpace same(Domain domain);

  /// Omega = bounding box of U inflated by `margin` times its diameter.
  static SamplingSpace with_margin(Domain inner, double margin = 0.3);

  /// Lower and upper bounds (m, M) on the density; equal for the uniform case.
  double density_min() const { return 1.0 / outer.area(); }
  double density_max() const { return 1.0 / outer.area(); }
};

struct SampleSet {
  PointCloud points;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> admissible;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t admissible_count() const;
};

/// n i.i.d. uniform points on the outer domain by rejection from its bounding box.
SampleSet sample_iid(const SamplingSpace& space, std::size_t n, std::uint64_t seed);

/// Point-cloud text format: `d n`, n coordinate lines, then one line of n mask bits.
void write_point_cloud(std::ostream& os, const SampleSet& samples);
SampleSet read_point_cloud(std::istream& is);

}  // namespace dirpart
