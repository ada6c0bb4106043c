#include "satflow/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "satflow/error.hpp"

namespace satflow {

void SchemeConfig::validate() const {
  auto bad = [](const char* what) { fail(ErrorCode::bad_parameter, what); };
  if (!(dt > 0.0) || !std::isfinite(dt)) bad("solver: dt must be positive");
  if (newton_tol && !(*newton_tol > 0.0)) bad("solver: newton_tol must be positive");
  if (newton_max_iter < 1) bad("solver: newton_max_iter must be at least 1");
  if (!(damping_min > 0.0 && damping_min <= 1.0)) bad("solver: damping_min must lie in (0, 1]");
  if (homotopy_stages.empty() || homotopy_stages.back() != 1.0) bad("solver: homotopy stages must end at 1");
  for (std::size_t k = 0; k < homotopy_stages.size(); ++k)
    if (!(homotopy_stages[k] > (k ? homotopy_stages[k - 1] : 0.0))) bad("solver: homotopy stages must increase");
  if (clamp_margin && !(*clamp_margin > 0.0)) bad("solver: clamp_margin must be positive");
  if (max_halvings < 0) bad("solver: max_halvings must be nonnegative");
}

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// 0 * inf counts as 0: a vanishing mobility switches the term off.
double mul(double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; }

class Discretization {
 public:
  Discretization(const Grid1D& grid, const ProblemSpec& spec) : grid_(grid), spec_(spec), v_(grid.n_cells) {
    for (std::size_t i = 0; i < grid.n_cells; ++i) v_[i] = spec.external.v(grid.center(i));
  }

  const Grid1D& grid() const { return grid_; }
  const ProblemSpec& spec() const { return spec_; }

  void check(std::span<const double> rho) const {
    if (rho.size() != grid_.n_cells) fail(ErrorCode::invalid_argument, "density size differs from grid size");
  }

  std::vector<double> xi(std::span<const double> rho) const {
    check(rho);
    std::vector<double> out(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double d = spec_.potential.du(rho[i]);
      if (!std::isfinite(d)) {
        std::ostringstream msg;
        msg << "U'(" << rho[i] << ") is not finite in cell " << i;
        fail(ErrorCode::singular_evaluation, msg.str());
      }
      out[i] = d + v_[i];
    }
    return out;
  }

  std::vector<double> velocity(std::span<const double> rho) const {
    const auto x = xi(rho);
    std::vector<double> v(rho.size() - 1);
    for (std::size_t j = 0; j + 1 < rho.size(); ++j) v[j] = -(x[j + 1] - x[j]) / grid_.dx;
    return v;
  }

  std::vector<double> flux_from(std::span<const double> rho, std::span<const double> vel) const {
    const auto& m = spec_.mobility;
    std::vector<double> f(rho.size() + 1, 0.0);
    for (std::size_t j = 0; j < vel.size(); ++j) {
      const double v = vel[j];
      if (v > 0.0) f[j + 1] = mul(m.m1(rho[j]) * m.m2(rho[j + 1]), v);
      else if (v < 0.0) f[j + 1] = mul(m.m1(rho[j + 1]) * m.m2(rho[j]), v);
    }
    return f;
  }

  std::vector<double> residual(std::span<const double> rho, std::span<const double> prev, double lambda,
                               double dt) const {
    const auto f = flux_from(rho, velocity(rho));
    const double r = lambda * dt / grid_.dx;
    std::vector<double> g(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) g[i] = rho[i] + r * (f[i + 1] - f[i]) - prev[i];
    return g;
  }

  numerics::Tridiagonal jacobian(std::span<const double> rho, double lambda, double dt, SignAtZero sign) const {
    const std::size_t n = rho.size();
    const auto vel = velocity(rho);
    const auto& m = spec_.mobility;
    const auto& u = spec_.potential;
    const double inv_dx = 1.0 / grid_.dx;
    std::vector<double> dd(n);
    for (std::size_t i = 0; i < n; ++i) dd[i] = u.ddu(rho[i]);
    // dF_j / d rho_j and dF_j / d rho_{j+1} for interior interface j.
    std::vector<double> a(n - 1), b(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double v = vel[j];
      const bool plus = v > 0.0 || (v == 0.0 && sign == SignAtZero::positive);
      const double lo = rho[j], hi = rho[j + 1];
      if (plus) {
        const double theta = m.m1(lo) * m.m2(hi);
        a[j] = mul(m.dm1(lo) * m.m2(hi), v) + mul(theta, dd[j]) * inv_dx;
        b[j] = mul(m.m1(lo) * m.dm2(hi), v) - mul(theta, dd[j + 1]) * inv_dx;
      } else {
        const double theta = m.m1(hi) * m.m2(lo);
        a[j] = mul(m.m1(hi) * m.dm2(lo), v) + mul(theta, dd[j]) * inv_dx;
        b[j] = mul(m.dm1(hi) * m.m2(lo), v) - mul(theta, dd[j + 1]) * inv_dx;
      }
    }
    const double r = lambda * dt * inv_dx;
    numerics::Tridiagonal jac(n);
    for (std::size_t i = 0; i < n; ++i) {
      double d = 1.0;
      if (i + 1 < n) {
        d += r * a[i];
        jac.upper[i] = r * b[i];
      }
      if (i > 0) {
        d -= r * b[i - 1];
        jac.lower[i] = -r * a[i - 1];
      }
      jac.diag[i] = d;
    }
    return jac;
  }

 private:
  Grid1D grid_;
  const ProblemSpec& spec_;
  std::vector<double> v_;
};

double abs_sum(std::span<const double> g) {
  double s = 0.0;
  for (double x : g) s += std::abs(x);
  return s;
}

struct Box {
  double lo, hi;
  double operator()(double x) const { return std::clamp(x, lo, hi); }
};

Box box_for(const SchemeConfig& config, const ProblemSpec& spec) {
  if (spec.singular()) {
    const double d = config.margin(spec.alpha);
    return {d, spec.alpha - d};
  }
  return {0.0, spec.alpha};
}

// Damped Newton with Armijo backtracking on sum |G|, plus one polishing step
// once the tolerance is met.
std::optional<std::pair<std::vector<double>, int>> newton(const Discretization& disc, std::span<const double> prev,
                                                          std::vector<double> x, double lambda,
                                                          const SchemeConfig& config) {
  const Box box = box_for(config, disc.spec());
  for (auto& xi : x) xi = box(xi);
  const double tol = config.tolerance(x.size());
  auto eval = [&](std::span<const double> y) -> std::optional<std::vector<double>> {
    try {
      auto g = disc.residual(y, prev, lambda, config.dt);
      for (double v : g)
        if (!std::isfinite(v)) return std::nullopt;
      return g;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::singular_evaluation) return std::nullopt;
      throw;
    }
  };
  auto g0 = eval(x);
  if (!g0) return std::nullopt;
  std::vector<double> g = std::move(*g0);
  double res = abs_sum(g);
  std::vector<double> rhs(x.size()), dir, trial(x.size());
  int iters = 0;
  bool polished = false;
  while (true) {
    const bool converged = res <= tol;
    if (converged && (polished || res == 0.0)) return std::make_pair(std::move(x), iters);
    if (iters >= config.newton_max_iter) {
      if (converged) return std::make_pair(std::move(x), iters);
      return std::nullopt;
    }
    const auto jac = disc.jacobian(x, lambda, config.dt, config.sign_at_zero);
    for (std::size_t i = 0; i < x.size(); ++i) rhs[i] = -g[i];
    if (!numerics::solve_tridiagonal(jac, rhs, dir)) {
      if (converged) return std::make_pair(std::move(x), iters);
      return std::nullopt;
    }
    ++iters;
    if (converged) {
      polished = true;
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = box(x[i] + dir[i]);
      auto gt = eval(trial);
      if (gt && abs_sum(*gt) <= res) {
        x = trial;
        g = std::move(*gt);
        res = abs_sum(g);
      }
      continue;
    }
    double t = 1.0;
    bool accepted = false;
    while (t >= config.damping_min) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = box(x[i] + t * dir[i]);
      auto gt = eval(trial);
      if (gt) {
        const double rt = abs_sum(*gt);
        if (rt <= (1.0 - 1e-4 * t) * res) {
          x = trial;
          g = std::move(*gt);
          res = rt;
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) return std::nullopt;
  }
}

double energy_or_nan(std::span<const double> rho, const Grid1D& grid, const ProblemSpec& spec) {
  auto e = try_discrete_energy(rho, grid, spec);
  return e ? *e : nan;
}

std::pair<DensityField, StepReport> step_once(const Discretization& disc, const DensityField& prev,
                                              const SchemeConfig& config) {
  const auto& spec = disc.spec();
  StepReport report;
  std::vector<double> x;
  auto direct = newton(disc, prev.values, prev.values, 1.0, config);
  if (direct) {
    x = std::move(direct->first);
    report.iterations = direct->second;
  } else {
    report.used_homotopy = true;
    std::vector<double> guess = prev.values;
    for (double lambda : config.homotopy_stages) {
      auto stage = newton(disc, prev.values, guess, lambda, config);
      if (!stage) {
        std::ostringstream msg;
        msg << "Newton failed to converge (homotopy stage lambda = " << lambda << ", dt = " << config.dt << ")";
        fail(ErrorCode::newton_diverged, msg.str());
      }
      report.iterations += stage->second;
      guess = std::move(stage->first);
    }
    x = std::move(guess);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= -1e-9 && x[i] <= spec.alpha + 1e-9)) {
      std::ostringstream msg;
      msg << "converged state leaves [0, alpha]: rho[" << i << "] = " << x[i];
      fail(ErrorCode::bound_violation, msg.str());
    }
    x[i] = std::clamp(x[i], 0.0, spec.alpha);
  }
  report.residual = abs_sum(disc.residual(x, prev.values, 1.0, config.dt));
  report.velocities = disc.velocity(x);
  report.fluxes = disc.flux_from(x, report.velocities);
  double diss = 0.0;
  for (std::size_t j = 0; j < report.velocities.size(); ++j) diss += report.fluxes[j + 1] * report.velocities[j];
  report.dissipation = config.dt * disc.grid().dx * diss;
  report.energy_before = energy_or_nan(prev.values, disc.grid(), spec);
  report.energy_after = energy_or_nan(x, disc.grid(), spec);
  report.max_energy_excess = report.energy_after - report.energy_before + report.dissipation;
  for (std::size_t i = 0; i < x.size(); ++i)
    report.linf_change = std::max(report.linf_change, std::abs(x[i] - prev.values[i]));
  return {DensityField(prev.grid, std::move(x)), std::move(report)};
}

// Retries a failed step as two half steps, recursively.
std::pair<DensityField, StepReport> step_with_halving(const Discretization& disc, const DensityField& prev,
                                                      const SchemeConfig& config, int level) {
  try {
    auto out = step_once(disc, prev, config);
    out.second.halvings = level;
    return out;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::newton_diverged && e.code() != ErrorCode::bound_violation) throw;
    if (level >= config.max_halvings) {
      std::ostringstream msg;
      msg << "step failed after " << level << " dt halvings: " << e.what();
      fail(ErrorCode::step_failed, msg.str());
    }
  }
  SchemeConfig half = config;
  half.dt = 0.5 * config.dt;
  auto first = step_with_halving(disc, prev, half, level + 1);
  auto second = step_with_halving(disc, first.first, half, level + 1);
  StepReport merged = std::move(second.second);
  const StepReport& a = first.second;
  merged.iterations += a.iterations;
  merged.energy_before = a.energy_before;
  merged.dissipation += a.dissipation;
  merged.used_homotopy = merged.used_homotopy || a.used_homotopy;
  merged.halvings = std::max(merged.halvings, a.halvings);
  merged.substeps += a.substeps;
  merged.max_energy_excess = std::max(merged.max_energy_excess, a.max_energy_excess);
  merged.linf_change = 0.0;
  for (std::size_t i = 0; i < prev.size(); ++i)
    merged.linf_change = std::max(merged.linf_change, std::abs(second.first.values[i] - prev.values[i]));
  return {std::move(second.first), std::move(merged)};
}

}  // namespace

std::vector<double> chemical_potential(std::span<const double> rho, const Grid1D& grid, const ProblemSpec& spec) {
  return Discretization(grid, spec).xi(rho);
}

std::vector<double> velocity(std::span<const double> rho, const Grid1D& grid, const ProblemSpec& spec) {
  return Discretization(grid, spec).velocity(rho);
}

std::vector<double> flux(std::span<const double> rho, const Grid1D& grid, const ProblemSpec& spec) {
  const Discretization disc(grid, spec);
  return disc.flux_from(rho, disc.velocity(rho));
}

std::vector<double> apply_H(std::span<const double> rho, std::span<const double> rho_prev, double lambda, double dt,
                            const Grid1D& grid, const ProblemSpec& spec) {
  if (rho_prev.size() != rho.size()) fail(ErrorCode::invalid_argument, "apply_H: size mismatch");
  return Discretization(grid, spec).residual(rho, rho_prev, lambda, dt);
}

numerics::Tridiagonal jacobian(std::span<const double> rho, double lambda, double dt, const Grid1D& grid,
                               const ProblemSpec& spec, SignAtZero sign) {
  return Discretization(grid, spec).jacobian(rho, lambda, dt, sign);
}

std::pair<DensityField, StepReport> implicit_step(const DensityField& rho_prev, const SchemeConfig& config,
                                                  const ProblemSpec& spec) {
  config.validate();
  const Discretization disc(rho_prev.grid, spec);
  disc.check(rho_prev.values);
  return step_once(disc, rho_prev, config);
}

std::optional<std::pair<DensityField, int>> newton_solve(const DensityField& rho_prev, const DensityField& guess,
                                                         double lambda, const SchemeConfig& config,
                                                         const ProblemSpec& spec) {
  config.validate();
  const Discretization disc(rho_prev.grid, spec);
  disc.check(guess.values);
  auto out = newton(disc, rho_prev.values, guess.values, lambda, config);
  if (!out) return std::nullopt;
  return std::make_pair(DensityField(rho_prev.grid, std::move(out->first)), out->second);
}

std::pair<double, double> constant_bracket(double c, double dt, const Grid1D& grid, const ProblemSpec& spec) {
  const double alpha = spec.alpha;
  if (!(c > 0.0 && c < alpha)) fail(ErrorCode::invalid_argument, "constant_bracket: c must lie in (0, alpha)");
  const double k = 2.0 * dt * spec.external.grad_bound / grid.dx;
  const auto& m = spec.mobility;
  // Sub: largest s found with s + k m(s) <= c. Super: smallest s with s - k m(s) >= c.
  double lo = 0.0, hi = c;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid + k * m(mid) <= c ? lo : hi) = mid;
  }
  const double sub = lo;
  lo = c;
  hi = alpha;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid - k * m(mid) >= c ? hi : lo) = mid;
  }
  return {sub, hi};
}

std::size_t nominal_steps(double t_end, double dt) {
  if (!(t_end >= 0.0)) fail(ErrorCode::invalid_argument, "t_end must be nonnegative");
  const double ratio = t_end / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, rounded)) return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::ceil(ratio));
}

Trajectory evolve(const DensityField& rho0, double t_end, const SchemeConfig& config, const ProblemSpec& spec,
                  const StepObserver& observer) {
  config.validate();
  const std::size_t n_steps = nominal_steps(t_end, config.dt);
  const Discretization disc(rho0.grid, spec);
  disc.check(rho0.values);

  Trajectory traj;
  traj.initial = rho0;
  traj.final_state = rho0;
  TrajectoryRow row0;
  row0.mass = rho0.mass();
  row0.energy = energy_or_nan(rho0.values, rho0.grid, spec);
  traj.rows.push_back(row0);

  for (std::size_t n = 1; n <= n_steps; ++n) {
    auto [next, report] = step_with_halving(disc, traj.final_state, config, 0);
    if (report.halvings > 0) ++traj.halving_events;
    traj.max_energy_excess = std::max(traj.max_energy_excess, report.max_energy_excess);
    traj.final_state = std::move(next);
    traj.steps = n;
    traj.t = static_cast<double>(n) * config.dt;
    TrajectoryRow row;
    row.step = n;
    row.t = traj.t;
    row.mass = traj.final_state.mass();
    row.energy = report.energy_after;
    row.dissipation = report.dissipation;
    row.newton_iters = report.iterations;
    row.residual = report.residual;
    row.linf_change = report.linf_change;
    traj.rows.push_back(row);
    if (observer && !observer(StepEvent{n, traj.t, traj.final_state, report})) {
      traj.stopped_early = n < n_steps;
      break;
    }
  }
  return traj;
}

}  // namespace satflow
