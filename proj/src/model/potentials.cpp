#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include "satflow/error.hpp"
#include "satflow/model.hpp"
#include "satflow/numerics.hpp"

namespace satflow {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double sampled_grad_bound(const ScalarFn& dv) {
  double bound = 0.0;
  constexpr int n = 4000;
  for (int k = 0; k <= n; ++k) bound = std::max(bound, std::abs(dv(static_cast<double>(k) / n)));
  return bound * (1.0 + 1e-6);
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::bad_parameter, what);
}

double smoothstep5(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep5_slope(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }

}  // namespace

double DiffusionPotential::truncated_inverse(double zeta, double alpha) const {
  if (zeta >= zeta_hi) return alpha;
  if (zeta <= zeta_lo) return 0.0;
  return std::clamp(du_inverse(zeta), 0.0, alpha);
}

void DiffusionPotential::validate(double alpha, std::size_t samples) const {
  require(u && du && ddu && du_inverse, "diffusion potential: missing function handle");
  require(!(zeta_lo > zeta_hi), "diffusion potential: zeta_lo > zeta_hi");
  samples = std::max<std::size_t>(samples, 3);
  double prev = -inf;
  for (std::size_t k = 1; k + 1 < samples; ++k) {
    const double s = alpha * static_cast<double>(k) / static_cast<double>(samples - 1);
    const double d = du(s), dd = ddu(s);
    if (!(dd >= -1e-12)) {
      std::ostringstream msg;
      msg << "diffusion potential is not convex: U''(" << s << ") = " << dd;
      fail(ErrorCode::bad_parameter, msg.str());
    }
    require(d >= prev - 1e-12, "diffusion potential: U' is not nondecreasing");
    require(d >= zeta_lo - 1e-12 && d <= zeta_hi + 1e-12, "diffusion potential: U' leaves [zeta_lo, zeta_hi]");
    prev = d;
  }
}

void ExternalPotential::validate(std::size_t samples) const {
  require(v && dv, "external potential: missing function handle");
  require(std::isfinite(grad_bound) && grad_bound >= 0.0, "external potential: invalid gradient bound");
  samples = std::max<std::size_t>(samples, 2);
  for (std::size_t k = 0; k < samples; ++k) {
    const double x = static_cast<double>(k) / static_cast<double>(samples - 1);
    if (!(v(x) >= -1e-14)) {
      std::ostringstream msg;
      msg << "external potential must be nonnegative: V(" << x << ") = " << v(x);
      fail(ErrorCode::bad_parameter, msg.str());
    }
  }
}

void ProblemSpec::validate() const {
  require(alpha > 0.0 && std::isfinite(alpha), "problem: alpha must be positive");
  require(mobility.alpha == alpha, "problem: mobility alpha differs from problem alpha");
  mobility.validate();
  potential.validate(alpha);
  external.validate();
  if (regularization) regularization->validate(alpha);
}

// --- diffusion potentials ------------------------------------------------------

DiffusionPotential quadratic_potential(double alpha) {
  require(alpha > 0.0, "quadratic: alpha must be positive");
  DiffusionPotential p;
  p.u = [](double s) { return s * s; };
  p.du = [](double s) { return 2.0 * s; };
  p.ddu = [](double) { return 2.0; };
  p.du_inverse = [](double z) { return 0.5 * z; };
  p.kind = DomainKind::closed;
  p.zeta_lo = 0.0;
  p.zeta_hi = 2.0 * alpha;
  return p;
}

DiffusionPotential boltzmann_potential(double alpha) {
  require(alpha > 0.0, "boltzmann: alpha must be positive");
  DiffusionPotential p;
  p.u = [](double s) { return s > 0.0 ? s * std::log(s) : 0.0; };
  p.du = [](double s) { return s > 0.0 ? std::log(s) + 1.0 : -inf; };
  p.ddu = [](double s) { return s > 0.0 ? 1.0 / s : inf; };
  p.du_inverse = [](double z) { return std::exp(z - 1.0); };
  p.kind = DomainKind::singular;
  p.zeta_lo = -inf;
  p.zeta_hi = std::log(alpha) + 1.0;
  return p;
}

DiffusionPotential porous_medium_potential(double m, double alpha) {
  if (!(m > 0.0)) fail(ErrorCode::bad_parameter, "porous_medium: exponent must be positive");
  require(alpha > 0.0, "porous_medium: alpha must be positive");
  if (m == 1.0) return boltzmann_potential(alpha);
  DiffusionPotential p;
  const double c = m / (m - 1.0);
  p.u = [m](double s) { return std::pow(std::max(s, 0.0), m) / (m - 1.0); };
  p.du = [m, c](double s) {
    if (s <= 0.0) return m > 1.0 ? 0.0 : -inf;
    return c * std::pow(s, m - 1.0);
  };
  p.ddu = [m](double s) {
    if (s <= 0.0) return m > 2.0 ? 0.0 : (m == 2.0 ? 2.0 : inf);
    return m * std::pow(s, m - 2.0);
  };
  p.du_inverse = [m, c](double z) { return std::pow(z / c, 1.0 / (m - 1.0)); };
  p.zeta_hi = c * std::pow(alpha, m - 1.0);
  if (m > 1.0) {
    p.kind = DomainKind::closed;
    p.zeta_lo = 0.0;
  } else {
    p.kind = DomainKind::singular;
    p.zeta_lo = -inf;
  }
  return p;
}

DiffusionPotential tabulated_potential(std::vector<double> s, std::vector<double> du_values) {
  require(s.size() == du_values.size() && s.size() >= 2, "tabulated U: need matching knot and value lists");
  for (std::size_t k = 1; k < s.size(); ++k) {
    require(s[k] > s[k - 1], "tabulated U: knots must be strictly increasing");
    require(du_values[k] >= du_values[k - 1], "tabulated U: U' values must be nondecreasing");
  }
  auto table = std::make_shared<numerics::Pchip>(s, du_values);
  DiffusionPotential p;
  p.u = [table](double x) {
    const double lo = table->x_min(), hi = table->x_max();
    const double c = std::clamp(x, lo, hi);
    return table->integral(c) + (x - c) * (*table)(c);
  };
  p.du = [table](double x) { return (*table)(std::clamp(x, table->x_min(), table->x_max())); };
  p.ddu = [table](double x) {
    if (x < table->x_min() || x > table->x_max()) return 0.0;
    return table->derivative(x);
  };
  p.du_inverse = [table](double z) {
    double lo = table->x_min(), hi = table->x_max();
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      ((*table)(mid) < z ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  p.kind = DomainKind::closed;
  p.zeta_lo = du_values.front();
  p.zeta_hi = du_values.back();
  return p;
}

// --- external potentials -------------------------------------------------------

ExternalPotential constant_potential(double c) {
  require(c >= 0.0, "constant V: value must be nonnegative");
  ExternalPotential p;
  p.v = [c](double) { return c; };
  p.dv = [](double) { return 0.0; };
  p.grad_bound = 0.0;
  return p;
}

ExternalPotential harmonic_potential(double k, double center) {
  require(k >= 0.0, "harmonic V: coefficient must be nonnegative");
  ExternalPotential p;
  p.v = [k, center](double x) { return k * (x - center) * (x - center); };
  p.dv = [k, center](double x) { return 2.0 * k * (x - center); };
  p.grad_bound = 2.0 * k * std::max(std::abs(center), std::abs(1.0 - center));
  return p;
}

ExternalPotential double_well_potential(double x1, double x2, double radius) {
  if (x1 > x2) std::swap(x1, x2);
  const double half_gap = 0.5 * (x2 - x1);
  require(radius > 0.0 && radius < half_gap, "double_well V: need 0 < radius < |x2 - x1| / 2");
  // Quadratic wells (x - x_i)^2 / 2 joined by a quintic blend on
  // [mid - w, mid + w], w = half_gap - radius; C^2 across the joins.
  const double mid = 0.5 * (x1 + x2);
  const double w = half_gap - radius;
  const double a = mid - w;
  ExternalPotential p;
  p.v = [=](double x) {
    const double vl = 0.5 * (x - x1) * (x - x1), vr = 0.5 * (x - x2) * (x - x2);
    if (x <= a) return vl;
    if (x >= mid + w) return vr;
    const double t = smoothstep5((x - a) / (2.0 * w));
    return (1.0 - t) * vl + t * vr;
  };
  p.dv = [=](double x) {
    if (x <= a) return x - x1;
    if (x >= mid + w) return x - x2;
    const double r = (x - a) / (2.0 * w);
    const double vl = 0.5 * (x - x1) * (x - x1), vr = 0.5 * (x - x2) * (x - x2);
    const double t = smoothstep5(r);
    return (1.0 - t) * (x - x1) + t * (x - x2) + smoothstep5_slope(r) * (vr - vl) / (2.0 * w);
  };
  p.grad_bound = sampled_grad_bound(p.dv);
  return p;
}

ExternalPotential polynomial_potential(std::vector<double> coefficients) {
  require(!coefficients.empty(), "polynomial V: need at least one coefficient");
  auto c = std::make_shared<const std::vector<double>>(std::move(coefficients));
  ExternalPotential p;
  p.v = [c](double x) {
    double acc = 0.0;
    for (auto it = c->rbegin(); it != c->rend(); ++it) acc = acc * x + *it;
    return acc;
  };
  p.dv = [c](double x) {
    double acc = 0.0;
    for (std::size_t k = c->size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * (*c)[k];
    return acc;
  };
  p.grad_bound = sampled_grad_bound(p.dv);
  return p;
}

// --- name dispatch -------------------------------------------------------------

namespace {

void arity(std::string_view family, std::span<const double> params, std::size_t lo, std::size_t hi) {
  if (params.size() < lo || params.size() > hi) {
    std::ostringstream msg;
    msg << family << ": expected " << lo;
    if (hi != lo) msg << ".." << hi;
    msg << " parameters, got " << params.size();
    fail(ErrorCode::bad_parameter, msg.str());
  }
}

std::pair<std::vector<double>, std::vector<double>> split_halves(std::string_view family,
                                                                 std::span<const double> params) {
  if (params.size() < 4 || params.size() % 2 != 0) {
    fail(ErrorCode::bad_parameter, std::string(family) + ": expected knots followed by the same number of values");
  }
  const auto n = params.size() / 2;
  return {std::vector<double>(params.begin(), params.begin() + n), std::vector<double>(params.begin() + n, params.end())};
}

}  // namespace

MobilityPair make_mobility(std::string_view family, std::span<const double> params, double alpha) {
  if (family == "logistic") {
    arity(family, params, 0, 0);
    return logistic_mobility(alpha);
  }
  if (family == "power_product") {
    arity(family, params, 2, 2);
    return power_product_mobility(params[0], params[1], alpha);
  }
  if (family == "double_well" || family == "double_well_mobility") {
    arity(family, params, 0, 0);
    return double_well_mobility(alpha);
  }
  if (family == "tabulated") {
    auto [s, values] = split_halves(family, params);
    require(s.front() == 0.0 && std::abs(s.back() - alpha) <= 1e-14 * alpha,
            "tabulated mobility: knots must span [0, alpha]");
    auto table = std::make_shared<numerics::Pchip>(std::move(s), std::move(values));
    return decompose_mobility([table](double x) { return (*table)(x); }, alpha, 1025,
                              [table](double x) { return table->derivative(x); });
  }
  fail(ErrorCode::unknown_family, "unknown mobility family '" + std::string(family) + "'");
}

DiffusionPotential make_diffusion(std::string_view family, std::span<const double> params, double alpha) {
  if (family == "quadratic") {
    arity(family, params, 0, 0);
    return quadratic_potential(alpha);
  }
  if (family == "porous_medium") {
    arity(family, params, 1, 1);
    return porous_medium_potential(params[0], alpha);
  }
  if (family == "boltzmann") {
    arity(family, params, 0, 0);
    return boltzmann_potential(alpha);
  }
  if (family == "tabulated") {
    auto [s, values] = split_halves(family, params);
    return tabulated_potential(std::move(s), std::move(values));
  }
  fail(ErrorCode::unknown_family, "unknown diffusion family '" + std::string(family) + "'");
}

ExternalPotential make_external(std::string_view family, std::span<const double> params) {
  if (family == "constant" || family == "zero") {
    arity(family, params, 0, 1);
    return constant_potential(params.empty() ? 0.0 : params[0]);
  }
  if (family == "harmonic") {
    arity(family, params, 1, 2);
    return harmonic_potential(params[0], params.size() > 1 ? params[1] : 0.0);
  }
  if (family == "double_well") {
    arity(family, params, 3, 3);
    return double_well_potential(params[0], params[1], params[2]);
  }
  if (family == "polynomial") {
    arity(family, params, 1, 64);
    return polynomial_potential(std::vector<double>(params.begin(), params.end()));
  }
  fail(ErrorCode::unknown_family, "unknown external potential family '" + std::string(family) + "'");
}

}  // namespace satflow
