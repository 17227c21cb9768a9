#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dirpart {

enum class KernelKind { kExponential, kGaussian, kIndicator };

/// Radial similarity profile eta(r). Unbounded profiles are truncated at the
/// support radius r*, the smallest r with eta(r) <= cutoff_tolerance * eta(0).
struct KernelProfile {
  KernelKind kind = KernelKind::kGaussian;
  double cutoff_tolerance = 1e-12;

  double operator()(double r) const;
  double support_radius() const;
};

KernelKind parse_kernel(std::string_view name);  // exp | gauss | ball
std::string kernel_name(KernelKind kind);

/// eta(r); throws InputError for r < 0.
double eval_profile(const KernelProfile& profile, double r);

/// eps^{-d} eta(|h| / eps).
double scaled_weight(const KernelProfile& profile, double eps, int dim,
                     std::span<const double> displacement);
double scaled_weight_at(const KernelProfile& profile, double eps, int dim, double distance);

/// sigma_eta = int_{R^d} eta(|h|) h_1^2 dh, in closed form:
/// (|S^{d-1}| / d) int_0^inf eta(r) r^{d+1} dr.
double surface_tension(const KernelProfile& profile, int dim);

/// Same quantity by adaptive radial quadrature; throws NumericError if the
/// requested relative tolerance is not reached.
double surface_tension_quadrature(const KernelProfile& profile, int dim, double rel_tol = 1e-8);

/// Power-law length scale eps_n = c n^{-alpha} in dimension d.
struct EpsilonRule {
  double c = 1.0;
  double alpha = 0.3;
  int dim = 2;

  double at(std::size_t n) const;
};

struct AdmissibilityReport {
  bool admissible = false;
  /// alpha must stay strictly below this bound (1/d).
  double alpha_bound = 0.0;
  /// (log n)^{C_d} / (n^{1/d} eps_n) at n = 2^j.
  std::vector<std::pair<int, double>> ratios;
  std::string message;
};

AdmissibilityReport is_admissible(const EpsilonRule& rule);

}  // namespace dirpart
