// Acceptance suite: one line per criterion with its measured quantity and runtime.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "satflow/app.hpp"
#include "satflow/diagnostics.hpp"
#include "satflow/steady.hpp"
#include "support.hpp"

using namespace satflow;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

Outcome structural() {
  const auto spec = test::logistic_quadratic(10.0);
  SchemeConfig c;
  c.dt = 1.0 / 64.0;
  std::mt19937_64 rng(2024);
  const DensityField rho0(Grid1D(64), random_density(64, 1.0, rng));
  double drift = 0.0, energy = 0.0, bounds = 0.0;
  const auto traj = evolve(rho0, 50.0 * c.dt, c, spec, [&](const StepEvent& e) {
    for (double r : e.state.values) bounds = std::max({bounds, -r, r - 1.0});
    return true;
  });
  for (std::size_t k = 1; k < traj.rows.size(); ++k) {
    const auto &a = traj.rows[k - 1], &b = traj.rows[k];
    drift = std::max(drift, std::abs(b.mass - a.mass) / a.mass);
    energy = std::max(energy, b.energy - a.energy - 1e-9 * (1.0 + std::abs(a.energy)));
  }
  const bool ok = traj.steps == 50 && drift <= 1e-10 && energy <= 0.0 && bounds <= 1e-9;
  return {ok, fmt("mass drift %.2e, energy excess %.2e, bound excess %.2e", drift, std::max(energy, 0.0),
                  std::max(bounds, 0.0))};
}

Outcome contraction() {
  const auto spec = test::logistic_quadratic(10.0);
  SchemeConfig c;
  c.dt = 1.0 / 64.0;
  const Grid1D g(32);
  const auto r = contraction_audit(100, 20, c, spec, g, 1);
  // Ordered constant pair.
  auto run = [&](double v) {
    std::vector<std::vector<double>> s;
    evolve(DensityField(g, std::vector<double>(32, v)), 20 * c.dt, c, spec, [&](const StepEvent& e) {
      s.push_back(e.state.values);
      return true;
    });
    return s;
  };
  const auto lo = run(0.2), hi = run(0.8);
  double order = 0.0;
  for (std::size_t n = 0; n < lo.size(); ++n)
    for (std::size_t i = 0; i < 32; ++i) order = std::max(order, lo[n][i] - hi[n][i]);
  const bool ok = r.passed && r.violations == 0 && r.max_order_violation <= 1e-8 && order <= 1e-8;
  return {ok, fmt("L1 excess %.2e, positive-part excess %.2e, order violation %.2e", r.max_l1_excess,
                  r.max_positive_excess, std::max(r.max_order_violation, order))};
}

Outcome oracle_equivalence() {
  const auto spec = test::logistic_quadratic(10.0);
  std::mt19937_64 rng(99);
  SchemeConfig c;
  c.dt = 0.1;
  const oracle::LogisticQuadratic o{0.1, [](double x) { return 10.0 * x * x; }};
  double worst_step = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto prev = test::uniform(3, 0.05, 0.95, rng);
    const auto next = implicit_step(DensityField(Grid1D(3), prev), c, spec).first;
    const auto want = o.picard(prev);
    for (int i = 0; i < 3; ++i) worst_step = std::max(worst_step, std::abs(next.values[i] - want[i]));
  }
  double worst_jac = 0.0;
  int states = 0;
  const std::size_t n = 8;
  const Grid1D g(n);
  while (states < 1000) {
    const auto rho = test::uniform(n, 0.05, 0.95, rng);
    const auto vel = velocity(rho, g, spec);
    if (std::any_of(vel.begin(), vel.end(), [](double v) { return std::abs(v) < 1e-3; })) continue;
    ++states;
    const auto J = jacobian(rho, 1.0, 0.02, g, spec);
    const double h = 1e-7;
    for (std::size_t j = 0; j < n; ++j) {
      auto up = rho, dn = rho;
      up[j] += h;
      dn[j] -= h;
      const auto gu = apply_H(up, rho, 1.0, 0.02, g, spec), gd = apply_H(dn, rho, 1.0, 0.02, g, spec);
      for (std::size_t i = 0; i < n; ++i) {
        const double fd = (gu[i] - gd[i]) / (2.0 * h);
        worst_jac = std::max(worst_jac, std::abs(fd - J.at(i, j)) / std::max(std::abs(J.at(i, j)), 1e-2));
      }
    }
  }
  return {worst_step <= 1e-9 && worst_jac <= 1e-5,
          fmt("step vs Picard %.2e, Jacobian relative %.2e", worst_step, worst_jac)};
}

Outcome steady_constants() {
  const auto spec = test::logistic_quadratic(10.0);
  std::string detail;
  bool ok = true;
  for (double eps : {0.1, 0.0}) {
    const double ref = solve_mass_constant(0.3, spec, Grid1D(1 << 14), eps).constant();
    std::vector<double> dx, err;
    for (int p = 5; p <= 10; ++p) {
      dx.push_back(std::ldexp(1.0, -p));
      err.push_back(std::abs(solve_mass_constant(0.3, spec, Grid1D(std::size_t{1} << p), eps).constant() - ref));
    }
    const auto fit = fit_order(dx, err);
    ok = ok && fit.fitted_order >= 0.9;
    detail += fmt("order %.3f at eps = %g", fit.fitted_order, eps) + (eps > 0 ? ", " : "");
  }
  return {ok, detail};
}

Outcome epsilon_limit() {
  const auto base = test::logistic_quadratic(10.0);
  const Grid1D g(64);
  SchemeConfig c;
  c.dt = 1.0 / 64.0;
  const auto rho = project_initial([](double x) { return 0.2 + 0.6 * x; }, g, 1.0);
  const auto exact_step = implicit_step(rho, c, base).first;
  const auto exact_steady = solve_mass_constant(0.3, base, g);
  const double eps = std::ldexp(1.0, -10);
  const auto reg = regularize(base, RegularizationParams::with_defaults(eps, 1.0));
  const double step_err = l1(implicit_step(rho, c, reg).first.values, exact_step.values);
  const double steady_err = l1(solve_mass_constant(0.3, reg, g).field.values, exact_steady.field.values);
  return {step_err <= 1e-3 && steady_err <= 1e-3,
          fmt("eps = 2^-10: step error %.2e, steady error %.2e", step_err, steady_err)};
}

Outcome self_convergence() {
  OrderStudy st;
  st.spec = test::logistic_quadratic(10.0);
  st.initial = [](double x) { return 0.5 + 0.2 * std::cos(M_PI * x); };
  st.levels = 4;
  const auto fit = estimate_order(st);
  return {fit.valid && fit.fitted_order >= 0.8, fmt("fitted order %.3f (r^2 %.4f)", fit.fitted_order, fit.r_squared)};
}

// Runs a shipped scenario and requires every embedded check.
Outcome scenario(const char* name, const std::vector<std::string>& wanted) {
  const std::vector<std::string> none;
  const auto r = app::run_command("scenario", name, none, std::string("acceptance_out/") + name);
  bool ok = r.exit_code == app::exit_pass;
  std::string detail;
  for (const auto& w : wanted) {
    bool found = false;
    for (const auto& c : r.checks) {
      if (c.name != w) continue;
      found = true;
      ok = ok && c.passed;
      detail += (detail.empty() ? "" : ", ") + w + fmt(" %.3g", c.value);
    }
    ok = ok && found;
  }
  if (r.exit_code != app::exit_pass && detail.empty()) detail = r.summary;
  return {ok, detail};
}

Outcome w11() {
  std::mt19937_64 rng(17);
  double worst = 0.0;
  bool axioms = true;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 2 + rng() % 63;
    const double dx = 1.0 / static_cast<double>(n);
    const auto u = test::uniform(n, -1.0, 1.0, rng), v = test::uniform(n, -1.0, 1.0, rng);
    std::vector<double> c{0.0};
    for (double x : u) c.push_back(c.back() + dx * x);
    double scan = INFINITY;
    for (double t : c) {
      double s = 0.0;
      for (double ci : c) s += std::abs(ci - t);
      scan = std::min(scan, dx * s);
    }
    const double nu = w_minus_1_1_norm(u, dx);
    worst = std::max(worst, std::abs(nu - scan));
    std::vector<double> sum(n), scaled(n);
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] = u[i] + v[i];
      scaled[i] = -2.5 * u[i];
    }
    axioms = axioms && nu > 0.0 && w_minus_1_1_norm(sum, dx) <= nu + w_minus_1_1_norm(v, dx) + 1e-12 &&
             std::abs(w_minus_1_1_norm(scaled, dx) - 2.5 * nu) <= 1e-12 &&
             w_minus_1_1_norm(std::vector<double>(n, 0.0), dx) == 0.0;
  }
  return {worst <= 1e-8 && axioms, fmt("max deviation from scan oracle %.2e, axioms ", worst) + (axioms ? "hold" : "FAIL")};
}

}  // namespace

int main(int argc, char** argv) {
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  struct Criterion {
    int id;
    const char* name;
    double budget;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "structural invariants", 5, structural},
      {2, "L1 contraction and comparison", 30, contraction},
      {3, "implicit-step oracle equivalence", 10, oracle_equivalence},
      {4, "steady-state constants", 60, steady_constants},
      {5, "epsilon -> 0 consistency", 60, epsilon_limit},
      {6, "self-convergence order", 120, self_convergence},
      {7, "convex-potential experiment", 60,
       [] {
         return scenario("convex_potential",
                         {"distance_to_mass_constant_profile", "distance_strictly_decreasing_after_step_10"});
       }},
      {8, "Barenblatt from above", 120,
       [] {
         return scenario("barenblatt_from_above",
                         {"unsaturated_block_contiguous", "block_flanked_by_saturation", "fixed_point"});
       }},
      {9, "non-minimising attractor", 120,
       [] {
         return scenario("non_minimising_double_well", {"fixed_point", "multi_constant_verdict", "constants_differ",
                                                        "energy_above_single_constant_profile"});
       }},
      {10, "W^{-1,1} norm", 5, w11},
  };
  int failures = 0;
  int ran = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget;
    const bool pass = o.passed && in_time;
    failures += !pass;
    std::printf("criterion %2d %-34s %s  %s  [%.2f s / %.0f s budget]\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.budget);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failures, ran);
  return failures == 0 && ran > 0 ? 0 : 1;
}
