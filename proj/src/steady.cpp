#include "satflow/steady.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "satflow/error.hpp"
#include "satflow/numerics.hpp"

namespace satflow {

const char* to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::regularized: return "regularized";
    case ProfileKind::truncated: return "truncated";
    case ProfileKind::composite: return "composite";
  }
  return "unknown";
}

const char* to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::minimiser_compatible: return "minimiser-compatible";
    case VerdictKind::multi_constant: return "multi-constant";
    case VerdictKind::violated: return "violated";
  }
  return "unknown";
}

double truncate(double s, double alpha) { return std::min(alpha, std::max(0.0, s)); }

namespace {

std::vector<double> potential_values(const ProblemSpec& spec, const Grid1D& grid) {
  std::vector<double> v(grid.n_cells);
  for (std::size_t i = 0; i < grid.n_cells; ++i) v[i] = spec.external.v(grid.center(i));
  return v;
}

double sum_mass(std::span<const double> rho, double dx) {
  double s = 0.0;
  for (double r : rho) s += r;
  return dx * s;
}

// Root of the nondecreasing map p on [lo, hi] with p(lo) <= target <= p(hi),
// refined to adjacent doubles. `slope` may return 0 when unknown.
template <class P, class D>
double monotone_root(const P& p, const D& slope, double lo, double hi, double target) {
  double c = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double value = p(c);
    if (value == target) return c;
    (value < target ? lo : hi) = c;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return c;
    const double d = slope(c);
    double next = d > 0.0 ? c - (value - target) / d : mid;
    if (!(next > lo && next < hi)) next = mid;
    if (std::abs(next - c) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(c)) return next;
    c = next;
  }
  return c;
}

}  // namespace

std::vector<double> profile_for_constant(double c, const ProblemSpec& spec, const Grid1D& grid) {
  std::vector<double> rho(grid.n_cells);
  for (std::size_t i = 0; i < grid.n_cells; ++i)
    rho[i] = spec.potential.truncated_inverse(c - spec.external.v(grid.center(i)), spec.alpha);
  return rho;
}

double mass_map(double c, const ProblemSpec& spec, const Grid1D& grid) {
  return sum_mass(profile_for_constant(c, spec, grid), grid.dx);
}

SteadyProfile solve_mass_constant(double mass, const ProblemSpec& spec, const Grid1D& grid) {
  const double alpha = spec.alpha;
  if (!(mass > 0.0 && mass < alpha)) {
    std::ostringstream msg;
    msg << "mass " << mass << " must lie strictly inside (0, " << alpha << ")";
    fail(ErrorCode::mass_out_of_range, msg.str());
  }
  const auto v = potential_values(spec, grid);
  const auto& pot = spec.potential;
  auto profile = [&](double c) {
    std::vector<double> rho(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) rho[i] = pot.truncated_inverse(c - v[i], alpha);
    return rho;
  };
  auto p = [&](double c) { return sum_mass(profile(c), grid.dx); };
  auto slope = [&](double c) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double z = c - v[i];
      if (!(z > pot.zeta_lo && z < pot.zeta_hi)) continue;
      const double dd = pot.ddu(pot.du_inverse(z));
      if (dd > 0.0 && std::isfinite(dd)) s += 1.0 / dd;
    }
    return grid.dx * s;
  };

  const auto [vmin, vmax] = std::minmax_element(v.begin(), v.end());
  const double center = pot.du(0.5 * mass);
  double lo = *vmin + center - 1.0, hi = *vmax + center + 1.0;
  double width = 1.0;
  int doublings = 0;
  while (p(lo) > mass) {
    if (++doublings > 200) fail(ErrorCode::bracket_failed, "solve_mass_constant: lower bracket expansion failed");
    width *= 2.0;
    lo -= width;
  }
  width = 1.0;
  doublings = 0;
  while (p(hi) < mass) {
    if (++doublings > 200) fail(ErrorCode::bracket_failed, "solve_mass_constant: upper bracket expansion failed");
    width *= 2.0;
    hi += width;
  }
  const double c = monotone_root(p, slope, lo, hi, mass);

  const double h = 5e-7;
  if (p(c + h) - p(c - h) <= 1e-12) {
    std::ostringstream msg;
    msg << "mass map is flat around C = " << c << "; the steady constant is not unique";
    fail(ErrorCode::non_unique_plateau, msg.str());
  }
  SteadyProfile out;
  out.constants = {c};
  out.field = DensityField(grid, profile(c));
  out.mass = out.field.mass();
  if (std::abs(out.mass - mass) > 1e-12) {
    std::ostringstream msg;
    msg << "solve_mass_constant: mass " << out.mass << " misses target " << mass;
    fail(ErrorCode::no_convergence, msg.str());
  }
  out.kind = spec.regularization ? ProfileKind::regularized : ProfileKind::truncated;
  out.verdict = check_euler_lagrange(out.field.values, grid, spec);
  return out;
}

SteadyProfile solve_mass_constant(double mass, const ProblemSpec& base, const Grid1D& grid, double epsilon) {
  if (epsilon > 0.0) return solve_mass_constant(mass, regularize(base, RegularizationParams::with_defaults(epsilon, base.alpha)), grid);
  return solve_mass_constant(mass, base, grid);
}

SteadyProfile barenblatt(double mass, double m, double center, const Grid1D& grid, double alpha) {
  if (!(m > 1.0)) fail(ErrorCode::bad_parameter, "barenblatt: exponent must exceed 1");
  if (!(mass > 0.0)) fail(ErrorCode::mass_out_of_range, "barenblatt: mass must be positive");
  if (!(center > 0.0 && center < 1.0)) fail(ErrorCode::bad_parameter, "barenblatt: center must lie in (0, 1)");
  const double k = (m - 1.0) / m, power = 1.0 / (m - 1.0);
  auto profile = [&](double c) {
    std::vector<double> b(grid.n_cells);
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
      const double d = grid.center(i) - center;
      const double base = k * (c - 0.5 * d * d);
      b[i] = base > 0.0 ? std::min(alpha, std::pow(base, power)) : 0.0;
    }
    return b;
  };
  auto p = [&](double c) { return sum_mass(profile(c), grid.dx); };
  auto no_slope = [](double) { return 0.0; };
  const double dist = std::min(center, 1.0 - center);
  const double c_max = 0.5 * dist * dist;
  if (p(c_max) < mass) {
    std::ostringstream msg;
    msg << "barenblatt: mass " << mass << " needs a support wider than the distance " << dist << " to the boundary";
    fail(ErrorCode::support_overflow, msg.str());
  }
  const double c = monotone_root(p, no_slope, 0.0, c_max, mass);
  if (std::sqrt(2.0 * c) >= dist) fail(ErrorCode::support_overflow, "barenblatt: support reaches the boundary");
  SteadyProfile out;
  out.constants = {c};
  out.field = DensityField(grid, profile(c));
  out.mass = out.field.mass();
  out.kind = ProfileKind::truncated;
  return out;
}

SteadyProfile composite_barenblatt(std::span<const double> masses, std::span<const double> centers, double m,
                                   const Grid1D& grid, double alpha) {
  if (masses.size() != centers.size() || masses.empty())
    fail(ErrorCode::bad_parameter, "composite_barenblatt: need matching, nonempty mass and center lists");
  SteadyProfile out;
  out.kind = ProfileKind::composite;
  out.field = DensityField(grid, std::vector<double>(grid.n_cells, 0.0));
  std::vector<double> radii;
  for (std::size_t k = 0; k < masses.size(); ++k) {
    const auto bump = barenblatt(masses[k], m, centers[k], grid, alpha);
    const double r = std::sqrt(2.0 * bump.constant());
    for (std::size_t j = 0; j < radii.size(); ++j)
      if (std::abs(centers[k] - centers[j]) <= r + radii[j])
        fail(ErrorCode::bad_parameter, "composite_barenblatt: bump supports overlap");
    radii.push_back(r);
    out.constants.push_back(bump.constant());
    for (std::size_t i = 0; i < grid.n_cells; ++i) out.field.values[i] += bump.field.values[i];
  }
  out.mass = out.field.mass();
  return out;
}

namespace {

struct Bounds {
  double upper = -std::numeric_limits<double>::infinity();  // max xi over cells with rho > tol
  double lower = std::numeric_limits<double>::infinity();   // min xi over cells with rho < alpha - tol
  bool feasible(double tol) const { return upper - tol <= lower + tol; }
  double constant() const {
    if (std::isinf(upper) && std::isinf(lower)) return 0.0;
    if (std::isinf(upper)) return lower;
    if (std::isinf(lower)) return upper;
    return 0.5 * (upper + lower);
  }
};

}  // namespace

ElVerdict check_euler_lagrange(std::span<const double> rho, const Grid1D& grid, const ProblemSpec& spec, double tol) {
  const std::size_t n = rho.size();
  const double alpha = spec.alpha;
  std::vector<double> xi(n);
  for (std::size_t i = 0; i < n; ++i) xi[i] = spec.potential.du(rho[i]) + spec.external.v(grid.center(i));
  auto add = [&](Bounds& b, std::size_t i) {
    if (rho[i] > tol) b.upper = std::max(b.upper, xi[i]);
    if (rho[i] < alpha - tol) b.lower = std::min(b.lower, xi[i]);
  };

  ElVerdict verdict;
  Bounds all;
  for (std::size_t i = 0; i < n; ++i) add(all, i);
  if (all.feasible(tol)) {
    verdict.kind = VerdictKind::minimiser_compatible;
    verdict.constants = {all.constant()};
    return verdict;
  }

  // Components: maximal runs with rho > tol, checked together with the
  // vacuum cells bordering them.
  bool pieces_ok = true;
  std::vector<double> constants;
  for (std::size_t i = 0; i < n;) {
    if (!(rho[i] > tol)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && rho[j] > tol) ++j;
    Bounds b;
    for (std::size_t k = i; k < j; ++k) add(b, k);
    if (i > 0) add(b, i - 1);
    if (j < n) add(b, j);
    if (!b.feasible(tol)) pieces_ok = false;
    constants.push_back(b.constant());
    i = j;
  }
  if (pieces_ok && constants.size() > 1) {
    verdict.kind = VerdictKind::multi_constant;
    verdict.constants = std::move(constants);
    return verdict;
  }

  verdict.kind = VerdictKind::violated;
  std::vector<double> finite;
  for (double x : xi)
    if (std::isfinite(x)) finite.push_back(x);
  const double c = finite.empty() ? 0.0 : numerics::median(finite);
  verdict.constants = {c};
  for (std::size_t i = 0; i < n; ++i) {
    if ((rho[i] > tol && xi[i] > c + tol) || (rho[i] < alpha - tol && xi[i] < c - tol))
      verdict.violated_cells.push_back(i);
  }
  return verdict;
}

FixedPointCheck verify_fixed_point(const DensityField& rho, const SchemeConfig& config, const ProblemSpec& spec) {
  const auto [next, report] = implicit_step(rho, config, spec);
  FixedPointCheck out;
  for (std::size_t i = 0; i < rho.size(); ++i) out.change += std::abs(next.values[i] - rho.values[i]);
  out.threshold = 10.0 * config.tolerance(rho.size());
  out.ok = out.change <= out.threshold;
  return out;
}

std::string steady_json(const SteadyProfile& profile) {
  nlohmann::ordered_json j;
  j["constants"] = profile.constants;
  j["mass"] = profile.mass;
  j["kind"] = to_string(profile.kind);
  nlohmann::ordered_json el;
  el["kind"] = to_string(profile.verdict.kind);
  el["constants"] = profile.verdict.constants;
  el["violated_cells"] = profile.verdict.violated_cells;
  j["el_verdict"] = el;
  return j.dump(2) + "\n";
}

void write_steady(const std::string& prefix, const SteadyProfile& profile) {
  write_csv(prefix + ".csv", profile.field);
  std::ofstream out(prefix + ".json");
  if (!out) fail(ErrorCode::io_error, "cannot open '" + prefix + ".json' for writing");
  out << steady_json(profile);
}

}  // namespace satflow
