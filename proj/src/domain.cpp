#include "dirpart/domain.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dirpart/errors.hpp"
#include "dirpart/random.hpp"

namespace dirpart {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double polar_angle(double x, double y) { return std::atan2(y, x); }

}  // namespace

PointCloud::PointCloud(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
  if (dim_ <= 0 || coords_.size() % dim_ != 0) {
    throw InputError("PointCloud: coordinate count is not a multiple of the dimension");
  }
}

void PointCloud::push_back(std::span<const double> p) {
  if (static_cast<int>(p.size()) != dim_) throw InputError("PointCloud: dimension mismatch");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

double PolarStar::radius_at(double theta) const { return c0 + c1 * std::cos(m * theta); }

Domain Domain::interval(double lo, double hi) {
  if (!(lo < hi)) throw InputError("interval: requires lo < hi");
  return Domain(Interval{lo, hi}, 1);
}

Domain Domain::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size()) throw InputError("box: lo/hi dimension mismatch");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) throw InputError("box: requires lo < hi on every axis");
  }
  const int d = static_cast<int>(lo.size());
  return Domain(Box{std::move(lo), std::move(hi)}, d);
}

Domain Domain::square(double lo, double hi, int dim) {
  return box(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
}

Domain Domain::disk(std::array<double, 2> center, double radius) {
  if (!(radius > 0.0)) throw InputError("disk: radius must be positive");
  return Domain(Disk{center, radius}, 2);
}

Domain Domain::polar_star(double c0, double c1, int m, std::array<double, 2> center) {
  if (!(c0 > std::abs(c1))) throw InputError("polar-star: requires c0 > |c1| so that R(theta) > 0");
  if (m < 0) throw InputError("polar-star: m must be nonnegative");
  return Domain(PolarStar{center, c0, c1, m}, 2);
}

bool Domain::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw InputError("contains: point dimension " + std::to_string(x.size()) +
                     " does not match domain dimension " + std::to_string(dim_));
  }
  return std::visit(
      Overloaded{
          [&](const Interval& s) { return s.lo < x[0] && x[0] < s.hi; },
          [&](const Box& s) {
            for (int i = 0; i < dim_; ++i) {
              if (!(s.lo[i] < x[i] && x[i] < s.hi[i])) return false;
            }
            return true;
          },
          [&](const Disk& s) {
            const double dx = x[0] - s.center[0];
            const double dy = x[1] - s.center[1];
            return dx * dx + dy * dy < s.radius * s.radius;
          },
          [&](const PolarStar& s) {
            const double dx = x[0] - s.center[0];
            const double dy = x[1] - s.center[1];
            const double r = std::hypot(dx, dy);
            if (r == 0.0) return true;
            return r < s.radius_at(polar_angle(dx, dy));
          },
      },
      shape_);
}

double Domain::area() const {
  return std::visit(
      Overloaded{
          [](const Interval& s) { return s.hi - s.lo; },
          [](const Box& s) {
            double v = 1.0;
            for (std::size_t i = 0; i < s.lo.size(); ++i) v *= s.hi[i] - s.lo[i];
            return v;
          },
          [](const Disk& s) { return std::numbers::pi * s.radius * s.radius; },
          [](const PolarStar& s) {
            auto half_r2 = [&](double t) {
              const double r = s.radius_at(t);
              return 0.5 * r * r;
            };
            double err = 0.0;
            const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                half_r2, 0.0, kTwoPi, 15, 1e-14, &err);
            return v;
          },
      },
      shape_);
}

Box Domain::bounding_box() const {
  return std::visit(
      Overloaded{
          [](const Interval& s) { return Box{{s.lo}, {s.hi}}; },
          [](const Box& s) { return s; },
          [](const Disk& s) {
            return Box{{s.center[0] - s.radius, s.center[1] - s.radius},
                       {s.center[0] + s.radius, s.center[1] + s.radius}};
          },
          [](const PolarStar& s) {
            const double r = s.c0 + std::abs(s.c1);
            return Box{{s.center[0] - r, s.center[1] - r}, {s.center[0] + r, s.center[1] + r}};
          },
      },
      shape_);
}

double Domain::diameter() const {
  const Box b = bounding_box();
  double s = 0.0;
  for (std::size_t i = 0; i < b.lo.size(); ++i) s += (b.hi[i] - b.lo[i]) * (b.hi[i] - b.lo[i]);
  return std::sqrt(s);
}

PointCloud Domain::boundary_samples(double spacing) const {
  if (!(spacing > 0.0)) throw InputError("boundary_samples: spacing must be positive");
  PointCloud out(dim_);
  std::visit(
      Overloaded{
          [&](const Interval& s) {
            out.push_back(std::array{s.lo});
            out.push_back(std::array{s.hi});
          },
          [&](const Box& s) {
            if (dim_ == 1) {
              out.push_back(std::array{s.lo[0]});
              out.push_back(std::array{s.hi[0]});
              return;
            }
            if (dim_ != 2) throw InputError("boundary_samples: boxes supported for d <= 2");
            const double w = s.hi[0] - s.lo[0];
            const double h = s.hi[1] - s.lo[1];
            const auto nx = static_cast<std::size_t>(std::ceil(w / spacing));
            const auto ny = static_cast<std::size_t>(std::ceil(h / spacing));
            for (std::size_t i = 0; i <= nx; ++i) {
              const double x = s.lo[0] + w * static_cast<double>(i) / nx;
              out.push_back(std::array{x, s.lo[1]});
              out.push_back(std::array{x, s.hi[1]});
            }
            for (std::size_t j = 1; j < ny; ++j) {
              const double y = s.lo[1] + h * static_cast<double>(j) / ny;
              out.push_back(std::array{s.lo[0], y});
              out.push_back(std::array{s.hi[0], y});
            }
          },
          [&](const Disk& s) {
            const auto m = static_cast<std::size_t>(std::ceil(kTwoPi * s.radius / spacing));
            for (std::size_t i = 0; i < m; ++i) {
              const double t = kTwoPi * static_cast<double>(i) / m;
              out.push_back(std::array{s.center[0] + s.radius * std::cos(t),
                                       s.center[1] + s.radius * std::sin(t)});
            }
          },
          [&](const PolarStar& s) {
            // |dgamma/dtheta| <= R_max + |c1| m
            const double speed = s.c0 + std::abs(s.c1) * (1.0 + s.m);
            const auto m = static_cast<std::size_t>(std::ceil(kTwoPi * speed / spacing));
            for (std::size_t i = 0; i < m; ++i) {
              const double t = kTwoPi * static_cast<double>(i) / m;
              const double r = s.radius_at(t);
              out.push_back(std::array{s.center[0] + r * std::cos(t), s.center[1] + r * std::sin(t)});
            }
          },
      },
      shape_);
  return out;
}

std::string Domain::describe() const {
  std::ostringstream os;
  os << std::setprecision(17);
  std::visit(Overloaded{
                 [&](const Interval& s) { os << "interval(" << s.lo << "," << s.hi << ")"; },
                 [&](const Box& s) {
                   os << "box(";
                   for (std::size_t i = 0; i < s.lo.size(); ++i) {
                     os << (i ? ";" : "") << s.lo[i] << ":" << s.hi[i];
                   }
                   os << ")";
                 },
                 [&](const Disk& s) {
                   os << "disk(" << s.center[0] << "," << s.center[1] << "," << s.radius << ")";
                 },
                 [&](const PolarStar& s) {
                   os << "polar-star(" << s.c0 << "," << s.c1 << "," << s.m << ";" << s.center[0]
                      << "," << s.center[1] << ")";
                 },
             },
             shape_);
  return os.str();
}

SamplingSpace SamplingSpace::make(Domain outer, Domain inner) {
  if (outer.dim() != inner.dim()) throw ConfigError("sampling space: outer/inner dimension mismatch");
  const Box b = inner.bounding_box();
  const int d = inner.dim();
  const int per_axis = d <= 2 ? 64 : (d == 3 ? 24 : 6);
  std::vector<int> idx(d, 0);
  std::vector<double> p(d);
  while (true) {
    for (int a = 0; a < d; ++a) {
      p[a] = b.lo[a] + (b.hi[a] - b.lo[a]) * (idx[a] + 0.5) / per_axis;
    }
    if (inner.contains(p) && !outer.contains(p)) {
      throw ConfigError("sampling space: inner domain " + inner.describe() +
                        " is not contained in outer domain " + outer.describe());
    }
    int a = 0;
    while (a < d && ++idx[a] == per_axis) idx[a++] = 0;
    if (a == d) break;
  }
  return SamplingSpace{std::move(outer), std::move(inner), Density::kUniform};
}

SamplingSpace SamplingSpace::same(Domain domain) {
  Domain copy = domain;
  return SamplingSpace{std::move(copy), std::move(domain), Density::kUniform};
}

SamplingSpace SamplingSpace::with_margin(Domain inner, double margin) {
  Box b = inner.bounding_box();
  const double pad = margin * inner.diameter();
  for (std::size_t i = 0; i < b.lo.size(); ++i) {
    b.lo[i] -= pad;
    b.hi[i] += pad;
  }
  Domain outer = inner.dim() == 1 ? Domain::interval(b.lo[0], b.hi[0]) : Domain::box(b.lo, b.hi);
  return make(std::move(outer), std::move(inner));
}

std::size_t SampleSet::admissible_count() const {
  return static_cast<std::size_t>(std::count(admissible.begin(), admissible.end(), std::uint8_t{1}));
}

SampleSet sample_iid(const SamplingSpace& space, std::size_t n, std::uint64_t seed) {
  constexpr std::uint64_t kWarmup = 10000;
  constexpr double kMinAcceptance = 1e-3;

  const int d = space.outer.dim();
  const Box b = space.outer.bounding_box();
  SampleSet out;
  out.seed = seed;
  out.points = PointCloud(d);
  out.points.reserve(n);
  out.admissible.reserve(n);

  Rng rng(seed);
  std::vector<double> p(d);
  std::uint64_t trials = 0;
  std::uint64_t accepted = 0;
  while (accepted < n) {
    for (int a = 0; a < d; ++a) p[a] = rng.uniform(b.lo[a], b.hi[a]);
    ++trials;
    if (space.outer.contains(p)) {
      ++accepted;
      out.points.push_back(p);
      out.admissible.push_back(space.inner.contains(p) ? 1 : 0);
    }
    if (trials >= kWarmup && static_cast<double>(accepted) < kMinAcceptance * trials) {
      throw ConfigError("sample_iid: rejection acceptance rate below 1e-3 for " +
                        space.outer.describe() + " (degenerate domain)");
    }
  }
  return out;
}

void write_point_cloud(std::ostream& os, const SampleSet& samples) {
  const int d = samples.points.dim();
  const std::size_t n = samples.size();
  os << d << ' ' << n << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = samples.points[i];
    for (int a = 0; a < d; ++a) os << (a ? " " : "") << p[a];
    os << '\n';
  }
  for (std::size_t i = 0; i < n; ++i) os << (i ? " " : "") << int(samples.admissible[i]);
  os << '\n';
}

SampleSet read_point_cloud(std::istream& is) {
  int d = 0;
  std::size_t n = 0;
  if (!(is >> d >> n) || d <= 0) throw InputError("point cloud: malformed header");
  SampleSet out;
  out.points = PointCloud(d);
  out.points.reserve(n);
  std::vector<double> p(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) {
      if (!(is >> p[a])) throw InputError("point cloud: truncated coordinates");
    }
    out.points.push_back(p);
  }
  out.admissible.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    int bit = 0;
    if (!(is >> bit) || (bit != 0 && bit != 1)) throw InputError("point cloud: malformed mask bits");
    out.admissible[i] = static_cast<std::uint8_t>(bit);
  }
  return out;
}

}  // namespace dirpart
