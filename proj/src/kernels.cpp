#include "dirpart/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dirpart/errors.hpp"

namespace dirpart {

namespace {

// |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)
double sphere_area(int dim) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

}  // namespace

double KernelProfile::operator()(double r) const {
  switch (kind) {
    case KernelKind::kExponential:
      return std::exp(-r);
    case KernelKind::kGaussian:
      return std::exp(-r * r);
    case KernelKind::kIndicator:
      return r < 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

double KernelProfile::support_radius() const {
  switch (kind) {
    case KernelKind::kExponential:
      return -std::log(cutoff_tolerance);
    case KernelKind::kGaussian:
      return std::sqrt(-std::log(cutoff_tolerance));
    case KernelKind::kIndicator:
      return 1.0;
  }
  return 1.0;
}

KernelKind parse_kernel(std::string_view name) {
  if (name == "exp" || name == "exponential") return KernelKind::kExponential;
  if (name == "gauss" || name == "gaussian") return KernelKind::kGaussian;
  if (name == "ball" || name == "indicator") return KernelKind::kIndicator;
  throw InputError("unknown kernel '" + std::string(name) + "' (expected exp|gauss|ball)");
}

std::string kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::kExponential:
      return "exp";
    case KernelKind::kGaussian:
      return "gauss";
    case KernelKind::kIndicator:
      return "ball";
  }
  return "?";
}

double eval_profile(const KernelProfile& profile, double r) {
  if (!(r >= 0.0)) throw InputError("eval_profile: radius must be nonnegative");
  return profile(r);
}

double scaled_weight_at(const KernelProfile& profile, double eps, int dim, double dist) {
  if (!(eps > 0.0)) throw InputError("scaled_weight: eps must be positive");
  return std::pow(eps, -dim) * profile(dist / eps);
}

double scaled_weight(const KernelProfile& profile, double eps, int dim,
                     std::span<const double> displacement) {
  double s = 0.0;
  for (double h : displacement) s += h * h;
  return scaled_weight_at(profile, eps, dim, std::sqrt(s));
}

double surface_tension(const KernelProfile& profile, int dim) {
  if (dim < 1) throw InputError("surface_tension: dimension must be >= 1");
  double radial = 0.0;
  switch (profile.kind) {
    case KernelKind::kExponential:  // Gamma(d + 2)
      radial = std::tgamma(dim + 2.0);
      break;
    case KernelKind::kGaussian:  // Gamma((d + 2) / 2) / 2
      radial = 0.5 * std::tgamma(0.5 * (dim + 2.0));
      break;
    case KernelKind::kIndicator:
      radial = 1.0 / (dim + 2.0);
      break;
  }
  return sphere_area(dim) / dim * radial;
}

double surface_tension_quadrature(const KernelProfile& profile, int dim, double rel_tol) {
  if (dim < 1) throw InputError("surface_tension: dimension must be >= 1");
  auto integrand = [&](double r) { return profile(r) * std::pow(r, dim + 1); };
  double err = 0.0;
  double radial = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (profile.kind == KernelKind::kIndicator) {
    radial = GK::integrate(integrand, 0.0, 1.0, 20, rel_tol * 1e-2, &err);
  } else {
    radial = GK::integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 20,
                           rel_tol * 1e-2, &err);
  }
  if (!(err <= rel_tol * std::abs(radial))) {
    throw NumericError("surface_tension: quadrature did not converge", err / std::abs(radial));
  }
  return sphere_area(dim) / dim * radial;
}

double EpsilonRule::at(std::size_t n) const {
  return c * std::pow(static_cast<double>(n), -alpha);
}

AdmissibilityReport is_admissible(const EpsilonRule& rule) {
  AdmissibilityReport rep;
  if (!(rule.c > 0.0) || !(rule.alpha > 0.0) || !std::isfinite(rule.c) || !std::isfinite(rule.alpha) ||
      rule.dim < 1) {
    rep.message = "epsilon rule must have finite c > 0, alpha > 0 and d >= 1";
    return rep;
  }
  const double d = rule.dim;
  const double cd = rule.dim == 2 ? 0.75 : 1.0 / d;
  rep.alpha_bound = 1.0 / d;
  // eps_n -> 0 needs alpha > 0; the ratio behaves like (log n)^{C_d} n^{alpha - 1/d}.
  rep.admissible = rule.alpha < rep.alpha_bound;
  for (int j = 1; j <= 60; ++j) {
    const double n = std::ldexp(1.0, j);
    const double ratio =
        std::pow(std::log(n), cd) / (std::pow(n, 1.0 / d) * rule.c * std::pow(n, -rule.alpha));
    rep.ratios.emplace_back(j, ratio);
  }
  std::ostringstream os;
  os << "eps_n = " << rule.c << " n^-" << rule.alpha << " in d=" << rule.dim << ": "
     << (rep.admissible ? "admissible" : "not admissible") << " (needs alpha < " << rep.alpha_bound
     << "); ratio at n=2^60 is " << rep.ratios.back().second;
  rep.message = os.str();
  return rep;
}

}  // namespace dirpart
