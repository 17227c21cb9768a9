#include "dirpart/spatial.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "dirpart/errors.hpp"

namespace dirpart {

namespace {

// Odometer over the integer box [lo, hi]; fn returns nothing.
template <class Fn>
void for_each_cell(std::span<const std::int64_t> lo, std::span<const std::int64_t> hi, Fn&& fn) {
  const std::size_t d = lo.size();
  for (std::size_t a = 0; a < d; ++a) {
    if (lo[a] > hi[a]) return;
  }
  std::vector<std::int64_t> c(lo.begin(), lo.end());
  while (true) {
    fn(std::span<const std::int64_t>(c));
    std::size_t a = 0;
    while (a < d) {
      if (++c[a] <= hi[a]) break;
      c[a] = lo[a];
      ++a;
    }
    if (a == d) return;
  }
}

}  // namespace

BucketGrid::BucketGrid(const PointCloud& points, double cell_size)
    : points_(points), cell_(cell_size), dim_(points.dim()) {
  if (!(cell_size > 0.0)) throw InputError("BucketGrid: cell size must be positive");
  if (points.empty()) return;

  std::vector<double> pmin(dim_, std::numeric_limits<double>::infinity());
  std::vector<double> pmax(dim_, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto p = points[i];
    for (int a = 0; a < dim_; ++a) {
      pmin[a] = std::min(pmin[a], p[a]);
      pmax[a] = std::max(pmax[a], p[a]);
    }
  }
  // Coarsen until the cell coordinates pack exactly into a 64-bit key.
  while (true) {
    int bits = 0;
    for (int a = 0; a < dim_; ++a) {
      const double span = (pmax[a] - pmin[a]) / cell_ + 2.0;
      bits += span < 1e18 ? std::bit_width(static_cast<std::uint64_t>(span)) : 64;
    }
    if (bits <= 64) break;
    cell_ *= 2.0;
  }
  lo_.resize(dim_);
  hi_.resize(dim_);
  for (int a = 0; a < dim_; ++a) {
    lo_[a] = static_cast<std::int64_t>(std::floor(pmin[a] / cell_));
    hi_[a] = static_cast<std::int64_t>(std::floor(pmax[a] / cell_));
  }
  std::vector<std::int64_t> cell(dim_);
  for (std::size_t i = 0; i < points.size(); ++i) {
    cell_of(points[i], cell);
    buckets_[key_of(cell)].push_back(static_cast<std::uint32_t>(i));
  }
}

void BucketGrid::cell_of(std::span<const double> q, std::span<std::int64_t> cell) const {
  for (int a = 0; a < dim_; ++a) cell[a] = static_cast<std::int64_t>(std::floor(q[a] / cell_));
}

std::uint64_t BucketGrid::key_of(std::span<const std::int64_t> cell) const {
  std::uint64_t key = 0;
  for (int a = 0; a < dim_; ++a) {
    const auto range = static_cast<std::uint64_t>(hi_[a] - lo_[a] + 1);
    key = key * range + static_cast<std::uint64_t>(cell[a] - lo_[a]);
  }
  return key;
}

const std::vector<std::uint32_t>* BucketGrid::bucket(std::span<const std::int64_t> cell) const {
  for (int a = 0; a < dim_; ++a) {
    if (cell[a] < lo_[a] || cell[a] > hi_[a]) return nullptr;
  }
  const auto it = buckets_.find(key_of(cell));
  return it == buckets_.end() ? nullptr : &it->second;
}

void BucketGrid::for_each_within(std::span<const double> q, double radius,
                                 const std::function<void(std::uint32_t)>& fn) const {
  if (buckets_.empty()) return;
  std::vector<std::int64_t> clo(dim_), chi(dim_);
  for (int a = 0; a < dim_; ++a) {
    clo[a] = std::max(lo_[a], static_cast<std::int64_t>(std::floor((q[a] - radius) / cell_)));
    chi[a] = std::min(hi_[a], static_cast<std::int64_t>(std::floor((q[a] + radius) / cell_)));
  }
  const double r2 = radius * radius;
  for_each_cell(clo, chi, [&](std::span<const std::int64_t> c) {
    if (const auto* b = bucket(c)) {
      for (std::uint32_t j : *b) {
        if (squared_distance(points_[j], q) <= r2) fn(j);
      }
    }
  });
}

std::uint32_t BucketGrid::nearest(std::span<const double> q) const {
  if (buckets_.empty()) throw InputError("BucketGrid::nearest: empty index");
  std::vector<std::int64_t> c(dim_);
  cell_of(q, c);
  // Chebyshev distance (in cells) from c to the occupied range.
  std::int64_t start = 0;
  std::int64_t stop = 0;
  for (int a = 0; a < dim_; ++a) {
    start = std::max({start, lo_[a] - c[a], c[a] - hi_[a]});
    stop = std::max({stop, std::abs(c[a] - lo_[a]), std::abs(c[a] - hi_[a])});
  }
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_j = 0;
  std::vector<std::int64_t> clo(dim_), chi(dim_);
  for (std::int64_t r = start; r <= stop; ++r) {
    for (int a = 0; a < dim_; ++a) {
      clo[a] = std::max(lo_[a], c[a] - r);
      chi[a] = std::min(hi_[a], c[a] + r);
    }
    for_each_cell(clo, chi, [&](std::span<const std::int64_t> cell) {
      std::int64_t cheb = 0;
      for (int a = 0; a < dim_; ++a) cheb = std::max(cheb, std::abs(cell[a] - c[a]));
      if (cheb != r) return;
      if (const auto* b = bucket(cell)) {
        for (std::uint32_t j : *b) {
          const double d2 = squared_distance(points_[j], q);
          if (d2 < best || (d2 == best && j < best_j)) {
            best = d2;
            best_j = j;
          }
        }
      }
    });
    // Anything in shells beyond r is at least r * cell away.
    const double reach = static_cast<double>(r) * cell_;
    if (best < std::numeric_limits<double>::infinity() && best < reach * reach) break;
  }
  return best_j;
}

}  // namespace dirpart
