#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "satflow/error.hpp"
#include "satflow/model.hpp"
#include "satflow/numerics.hpp"

namespace satflow {

RegularizationParams RegularizationParams::with_defaults(double epsilon, double alpha) {
  RegularizationParams p;
  p.epsilon = epsilon;
  p.kappa = epsilon;
  p.s0 = 0.5 * alpha;
  p.band_width = epsilon * alpha / 8.0;
  return p;
}

void RegularizationParams::validate(double alpha) const {
  auto bad = [](const char* what) { fail(ErrorCode::bad_parameter, what); };
  if (!(epsilon > 0.0 && epsilon <= 1.0)) bad("regularization: epsilon must lie in (0, 1]");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) bad("regularization: kappa must be positive");
  if (!(s0 > 0.0 && s0 < alpha)) bad("regularization: s0 must lie in (0, alpha)");
  if (!(band_width > 0.0 && band_width <= 0.25 * alpha)) bad("regularization: band width must lie in (0, alpha/4]");
  if (!(quadrature_tol > 0.0)) bad("regularization: quadrature tolerance must be positive");
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double edge_fraction = 1e-12;  // first table node sits at alpha * edge_fraction
constexpr std::size_t half_nodes = 2048;

// C^1 ramp with unit slope at 0, flat at height eta/2 beyond eta.
double ramp(double s, double eta) {
  if (s <= 0.0) return 0.0;
  return s < eta ? s - s * s / (2.0 * eta) : 0.5 * eta;
}
double ramp_slope(double s, double eta) {
  if (s < 0.0 || s >= eta) return 0.0;
  return 1.0 - s / eta;
}

struct RegularizedTable {
  double alpha = 1.0;
  double cell_tol = 1e-14;
  ScalarFn ddu;  // U_eps'' on (0, alpha)
  std::vector<double> s, du, u;
  double k_lo = 0.0, k_hi = 0.0;  // U'' ~ k_lo / s near 0, k_hi / (alpha - s) near alpha

  double quad(const std::function<double(double)>& f, double a, double b) const {
    if (a == b) return 0.0;
    const auto r = numerics::integrate(f, a, b, cell_tol, 1e-13);
    if (!std::isfinite(r.value))
      fail(ErrorCode::integral_diverged, "regularize: quadrature of U_eps'' failed");
    return r.value;
  }

  std::size_t cell(double x) const {
    const auto it = std::upper_bound(s.begin(), s.end(), x);
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - s.begin() - 1, 0,
                                                               static_cast<std::ptrdiff_t>(s.size()) - 2));
  }

  double second(double x) const {
    if (x <= 0.0 || x >= alpha) return inf;
    if (x < s.front()) return k_lo / x;
    if (x > s.back()) return k_hi / (alpha - x);
    return ddu(x);
  }

  double first(double x) const {
    if (x <= 0.0) return -inf;
    if (x >= alpha) return inf;
    if (x < s.front()) return du.front() + k_lo * std::log(x / s.front());
    if (x > s.back()) return du.back() - k_hi * std::log((alpha - x) / (alpha - s.back()));
    const auto k = cell(x);
    return du[k] + quad(ddu, s[k], x);
  }

  double value(double x) const {
    x = std::clamp(x, 0.0, alpha);
    if (x < s.front()) {
      const double s0 = s.front();
      const double xlog = x > 0.0 ? x * std::log(x / s0) : 0.0;
      return u.front() + (x - s0) * du.front() + k_lo * (xlog - x + s0);
    }
    if (x > s.back()) {
      const double t = alpha - x, t0 = alpha - s.back();
      const double tlog = t > 0.0 ? t * std::log(t / t0) : 0.0;
      return u.back() + (x - s.back()) * du.back() - k_hi * (t - t0 - tlog);
    }
    const auto k = cell(x);
    return u[k] + (x - s[k]) * du[k] + quad([&](double g) { return (x - g) * ddu(g); }, s[k], x);
  }

  double inverse(double zeta) const {
    if (zeta <= du.front()) return s.front() * std::exp((zeta - du.front()) / k_lo);
    if (zeta >= du.back()) return alpha - (alpha - s.back()) * std::exp(-(zeta - du.back()) / k_hi);
    const auto it = std::upper_bound(du.begin(), du.end(), zeta);
    const auto k = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
        it - du.begin() - 1, 0, static_cast<std::ptrdiff_t>(du.size()) - 2));
    double lo = s[k], hi = s[k + 1];
    double x = lo + (hi - lo) * (zeta - du[k]) / (du[k + 1] - du[k]);
    for (int iter = 0; iter < 100; ++iter) {
      const double f = first(x) - zeta;
      if (f == 0.0) return x;
      (f < 0.0 ? lo : hi) = x;
      double next = x - f / second(x);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - x) <= 1e-15 * std::min(x, alpha - x) || hi - lo <= 1e-15 * std::min(x, alpha - x))
        return next;
      x = next;
    }
    return x;
  }
};

}  // namespace

ProblemSpec regularize(const ProblemSpec& spec, const RegularizationParams& params) {
  const double alpha = spec.alpha;
  params.validate(alpha);
  const double anchor_curv = spec.potential.ddu(params.s0);
  if (!(anchor_curv > 0.0)) {
    std::ostringstream msg;
    msg << "regularize: U''(s0) = " << anchor_curv << " at s0 = " << params.s0 << " must be positive";
    fail(ErrorCode::anchor_invalid, msg.str());
  }

  const MobilityPair base_m = spec.mobility;
  const DiffusionPotential base_u = spec.potential;
  const double eps = params.epsilon, eta = params.band_width;
  const double cap = 1.0 / params.kappa;
  const double a = (1.0 + eps) / base_m.m2(0.0);
  const double b = (1.0 + eps) / base_m.m1(alpha);
  if (!std::isfinite(a) || !std::isfinite(b) || !(a > 0.0) || !(b > 0.0))
    fail(ErrorCode::bad_parameter, "regularize: mobility factors must be positive at the opposite end");

  MobilityPair m_eps;
  m_eps.alpha = alpha;
  m_eps.m1 = [base_m, a, eta](double s) { return base_m.m1(s) + a * ramp(s, eta); };
  m_eps.dm1 = [base_m, a, eta](double s) { return base_m.dm1(s) + a * ramp_slope(s, eta); };
  m_eps.m2 = [base_m, b, eta, alpha](double s) { return base_m.m2(s) + b * ramp(alpha - s, eta); };
  m_eps.dm2 = [base_m, b, eta, alpha](double s) { return base_m.dm2(s) - b * ramp_slope(alpha - s, eta); };

  auto phi_eps = [base_m, base_u, cap, eps](double s) {
    const double mv = base_m(s);
    const double phi = mv > 0.0 ? mv * base_u.ddu(s) : 0.0;
    return std::min(phi, cap) + eps;
  };

  auto table = std::make_shared<RegularizedTable>();
  table->alpha = alpha;
  table->cell_tol = params.quadrature_tol / static_cast<double>(4 * half_nodes);
  table->ddu = [phi_eps, m_eps](double s) { return phi_eps(s) / m_eps(s); };

  // Geometric nodes from alpha * edge_fraction up to alpha/2, mirrored.
  const std::size_t n = 2 * half_nodes - 1, mid = half_nodes - 1;
  table->s.resize(n);
  const double lo = alpha * edge_fraction, ratio = 0.5 * alpha / lo;
  for (std::size_t k = 0; k < half_nodes; ++k)
    table->s[k] = lo * std::pow(ratio, static_cast<double>(k) / static_cast<double>(mid));
  table->s[mid] = 0.5 * alpha;
  for (std::size_t k = 0; k < mid; ++k) table->s[n - 1 - k] = alpha - table->s[k];

  auto& s = table->s;
  auto& du = table->du;
  auto& u = table->u;
  du.assign(n, 0.0);
  u.assign(n, 0.0);
  du[mid] = base_u.du(0.5 * alpha);
  u[mid] = base_u.u(0.5 * alpha);
  const auto& f = table->ddu;
  for (std::size_t k = mid; k + 1 < n; ++k) {
    const double x1 = s[k + 1];
    du[k + 1] = du[k] + table->quad(f, s[k], x1);
    u[k + 1] = u[k] + (x1 - s[k]) * du[k] + table->quad([&](double g) { return (x1 - g) * f(g); }, s[k], x1);
  }
  for (std::size_t k = mid; k > 0; --k) {
    const double x0 = s[k - 1];
    du[k - 1] = du[k] - table->quad(f, x0, s[k]);
    u[k - 1] = u[k] - (s[k] - x0) * du[k] + table->quad([&](double g) { return (g - x0) * f(g); }, x0, s[k]);
  }
  table->k_lo = s.front() * f(s.front());
  table->k_hi = (alpha - s.back()) * f(s.back());

  ProblemSpec out;
  out.alpha = alpha;
  out.mobility = m_eps;
  out.external = spec.external;
  out.regularization = params;
  DiffusionPotential& p = out.potential;
  p.kind = DomainKind::singular;
  p.zeta_lo = -inf;
  p.zeta_hi = inf;
  p.u = [table](double x) { return table->value(x); };
  p.du = [table](double x) { return table->first(x); };
  p.ddu = [table](double x) { return table->second(x); };
  p.du_inverse = [table](double z) { return table->inverse(z); };
  return out;
}

double regularized_phi_prime(const ProblemSpec& regularized, double s) {
  const double alpha = regularized.alpha;
  s = std::clamp(s, alpha * edge_fraction, alpha * (1.0 - edge_fraction));
  return regularized.mobility(s) * regularized.potential.ddu(s);
}

}  // namespace satflow
