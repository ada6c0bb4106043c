#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace satflow {

using ScalarFn = std::function<double(double)>;

/// Saturation mobility m = m1 * m2 on [0, alpha], split into a
/// nondecreasing factor m1 and a nonincreasing factor m2 so the flux can be
/// upwinded. Both factors are clamped to their values at 0 and alpha when
/// evaluated outside the interval.
struct MobilityPair {
  double alpha = 1.0;
  ScalarFn m1;
  ScalarFn m2;
  ScalarFn dm1;
  ScalarFn dm2;

  double operator()(double s) const { return m1(s) * m2(s); }

  /// Sampled check of the pair invariants; throws BadParameter on failure.
  void validate(std::size_t samples = 1001) const;
};

enum class DomainKind {
  closed,    // U' finite at both 0 and alpha
  singular,  // U'(0+) = -inf and/or U'(alpha-) = +inf
};

struct DiffusionPotential {
  ScalarFn u;
  ScalarFn du;
  ScalarFn ddu;
  // (U')^{-1}, only called on the open range (zeta_lo, zeta_hi).
  ScalarFn du_inverse;
  DomainKind kind = DomainKind::closed;
  double zeta_lo = 0.0;  // U'(0+)
  double zeta_hi = 0.0;  // U'(alpha-)

  /// T_{0,alpha} o (U')^{-1} in the extended sense: alpha at or above zeta_hi,
  /// zero at or below zeta_lo.
  double truncated_inverse(double zeta, double alpha) const;

  void validate(double alpha, std::size_t samples = 1001) const;
};

/// V(x) on the unit interval, V >= 0.
struct ExternalPotential {
  ScalarFn v;
  ScalarFn dv;
  double grad_bound = 0.0;  // sup |V'| on [0, 1]

  void validate(std::size_t samples = 1001) const;
};

struct RegularizationParams {
  double epsilon = 0.1;
  double kappa = 0.1;          // cutoff: Phi_eps' <= 1/kappa + epsilon
  double s0 = 0.5;             // anchor where U''(s0) > 0
  double band_width = 0.0125;  // width of the endpoint ramps of m_eps
  double quadrature_tol = 1e-10;

  /// kappa = epsilon, s0 = alpha/2, band width epsilon*alpha/8.
  static RegularizationParams with_defaults(double epsilon, double alpha);
  void validate(double alpha) const;
};

struct ProblemSpec {
  double alpha = 1.0;
  MobilityPair mobility;
  DiffusionPotential potential;
  ExternalPotential external;
  std::optional<RegularizationParams> regularization;

  double epsilon() const { return regularization ? regularization->epsilon : 0.0; }
  bool singular() const { return potential.kind == DomainKind::singular; }
  void validate() const;
};

// --- mobility decomposition -------------------------------------------------

/// Splits a mobility into monotone factors through log m:
///   m1(s) = m(alpha/2) exp( int_{alpha/2}^s (m')_+ / m ),
///   m2(s) =           exp( int_{alpha/2}^s (m')_- / m ).
/// The unbounded factor on each half is recovered as m divided by the
/// bounded one, so the product reproduces m to rounding. Cumulative
/// integrals are tabulated on `grid_resolution` nodes; evaluation between
/// nodes integrates from the nearest node on the left. When `dm` is empty
/// the derivative falls back to central differences with h = 1e-6 * alpha.
MobilityPair decompose_mobility(ScalarFn m, double alpha, std::size_t grid_resolution = 1025,
                                ScalarFn dm = {});

// --- regularization ----------------------------------------------------------

/// Uniformly elliptic approximation of `spec`:
///   m_eps       = (m1 + a r_lo) (m2 + b r_hi), a = (1+eps)/m2(0), b = (1+eps)/m1(alpha)
///   Phi_eps'(s) = min(m(s) U''(s), 1/kappa) + eps
///   U_eps''     = Phi_eps' / m_eps, anchored at U_eps(alpha/2) = U(alpha/2),
///                 U_eps'(alpha/2) = U'(alpha/2).
/// r_lo, r_hi are C^1 ramps of unit slope supported in bands of width
/// `band_width` at 0 and alpha. U_eps' and U_eps are tabulated eagerly.
ProblemSpec regularize(const ProblemSpec& spec, const RegularizationParams& params);

/// Phi_eps' of a regularized spec at s (diagnostic access).
double regularized_phi_prime(const ProblemSpec& regularized, double s);

// --- built-in families --------------------------------------------------------

MobilityPair power_product_mobility(double a, double b, double alpha);  // s^a (alpha-s)^b
MobilityPair logistic_mobility(double alpha);                          // s (alpha-s)
MobilityPair double_well_mobility(double alpha);

DiffusionPotential quadratic_potential(double alpha);                 // s^2
DiffusionPotential porous_medium_potential(double m, double alpha);   // s^m / (m-1)
DiffusionPotential boltzmann_potential(double alpha);                 // s log s
// U' given at knots (nondecreasing), monotone cubic in between, U(s0) = 0.
DiffusionPotential tabulated_potential(std::vector<double> s, std::vector<double> du_values);

ExternalPotential constant_potential(double c);
ExternalPotential harmonic_potential(double k, double center = 0.0);  // k (x - center)^2
ExternalPotential double_well_potential(double x1, double x2, double radius);
ExternalPotential polynomial_potential(std::vector<double> coefficients);  // sum c_k x^k

MobilityPair make_mobility(std::string_view family, std::span<const double> params, double alpha);
DiffusionPotential make_diffusion(std::string_view family, std::span<const double> params,
                                  double alpha);
ExternalPotential make_external(std::string_view family, std::span<const double> params);

}  // namespace satflow
