#include <algorithm>
#include <cmath>
#include <map>

#include "emit.hpp"
#include "satflow/app.hpp"
#include "satflow/diagnostics.hpp"
#include "satflow/numerics.hpp"
#include "satflow/steady.hpp"

namespace satflow::app {

using detail::join;
using detail::json;
using detail::Report;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ok: return exit_pass;
    case ErrorCode::invalid_argument:
    case ErrorCode::non_positive_interior:
    case ErrorCode::anchor_invalid:
    case ErrorCode::unknown_family:
    case ErrorCode::bad_parameter:
    case ErrorCode::out_of_range:
    case ErrorCode::mass_out_of_range:
    case ErrorCode::support_overflow:
    case ErrorCode::parse_error:
    case ErrorCode::validation_error:
    case ErrorCode::io_error:
      return exit_config;
    default:
      return exit_solver;
  }
}

namespace {

const std::map<std::string, std::string, std::less<>>& scenario_table() {
  // Figure captions omit alpha, initial data and end times; those below are reconstructions.
  static const std::map<std::string, std::string, std::less<>> table = {
      {"convex_potential", R"(# m = s(1-s), U = s^2, V = 10 x^2, started from the constant 0.3
problem.mobility = logistic
problem.u = quadratic
problem.v = harmonic
problem.v_params = 10
grid.n_cells = 64
time.dt = 2^-6
time.steady = true
initial.kind = constant
initial.value = 0.3
outputs.snapshot_stride = 20
outputs.flags = trajectory, final, steady, report
)"},
      {"barenblatt_from_above", R"(# u = 1 - rho sees the confining potential (x - 1/2)^2 / 2
problem.mobility = double_well
problem.u = quadratic
problem.v = polynomial
problem.v_params = 0, 0.5, -0.5
grid.n_cells = 64
time.dt = 2^-6
time.steady = true
initial.kind = alpha_minus_bump
initial.center = 0.5
initial.width = 0.2
initial.mass = 0.02
outputs.snapshot_stride = 25
outputs.flags = trajectory, final, steady, report
)"},
      {"non_minimising_double_well", R"(# two Barenblatt bumps of unequal mass, one in each well
problem.mobility = double_well
problem.u = quadratic
problem.v = double_well
problem.v_params = 0.25, 0.75, 0.2
grid.n_cells = 128
time.dt = 2^-6
time.steady = true
initial.kind = two_bump
initial.radius = 0.2
initial.masses = 0.002, 0.0006
initial.centers = 0.25, 0.75
outputs.snapshot_stride = 50
outputs.flags = trajectory, final, steady, report
)"},
      {"contraction_audit", R"(problem.mobility = logistic
problem.u = quadratic
problem.v = harmonic
problem.v_params = 10
grid.n_cells = 32
time.dt = 2^-6
time.t_end = 20/64
initial.kind = constant
initial.value = 0.3
audit.pairs = 100
audit.steps = 20
audit.seed = 1
)"},
      {"order_study", R"(# smooth data kept inside [0.3, 0.7]
problem.mobility = logistic
problem.u = quadratic
problem.v = harmonic
problem.v_params = 10
initial.kind = cosine
initial.value = 0.5
initial.height = 0.2
initial.center = 0
initial.width = 1
study.axis = dx_dt_joint
study.levels = 4
study.n_cells = 16
study.dt = 1/16
study.t_end = 0.25
)"},
      {"epsilon_study", R"(# single steps and steady states of the regularized problems against epsilon = 0
problem.mobility = logistic
problem.u = quadratic
problem.v = harmonic
problem.v_params = 10
grid.n_cells = 64
time.dt = 2^-6
initial.kind = constant
initial.value = 0.3
study.axis = epsilon
study.epsilons = 2^-2, 2^-4, 2^-6, 2^-8, 2^-10
)"},
  };
  return table;
}

double l1_distance(std::span<const double> a, std::span<const double> b, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return dx * s;
}

struct Evolution {
  Trajectory trajectory;
  bool steady = false;
  bool detected = false;
  FixedPointCheck fixed_point;
  double min_value = 0.0;
  double max_value = 0.0;
  std::vector<double> distance;  // L1 distance to the target per step, step 0 first
};

Evolution evolve_with_outputs(const RunConfig& c, const ProblemSpec& spec, const DensityField& rho0,
                              const SchemeConfig& solver, Report& report, const std::vector<double>* target = nullptr) {
  const auto& out = c.outputs;
  detail::SnapshotWriter snapshots(join(out.directory, "snapshots"), out.snapshot_stride);
  snapshots.write(0, rho0);

  Evolution ev;
  ev.steady = c.steady;
  ev.min_value = *std::min_element(rho0.values.begin(), rho0.values.end());
  ev.max_value = *std::max_element(rho0.values.begin(), rho0.values.end());
  if (target) ev.distance.push_back(l1_distance(rho0.values, *target, rho0.grid.dx));
  auto observe = [&](const StepEvent& e) {
    snapshots.write(e.step, e.state);
    const auto [lo, hi] = std::minmax_element(e.state.values.begin(), e.state.values.end());
    ev.min_value = std::min(ev.min_value, *lo);
    ev.max_value = std::max(ev.max_value, *hi);
    if (target) ev.distance.push_back(l1_distance(e.state.values, *target, e.state.grid.dx));
    return true;
  };

  if (c.steady) {
    auto run = run_to_steady(rho0, solver, spec, c.detector, observe);
    ev.trajectory = std::move(run.trajectory);
    ev.detected = run.detected;
    ev.fixed_point = run.fixed_point;
  } else {
    ev.trajectory = evolve(rho0, c.t_end, solver, spec, observe);
  }

  if (out.has("trajectory") || !ev.distance.empty()) detail::ensure_directory(out.directory);
  if (out.has("trajectory")) {
    detail::write_trajectory_csv(join(out.directory, "trajectory.csv"), ev.trajectory);
    report.artifact("trajectory.csv");
  }
  if (out.has("final")) {
    detail::ensure_directory(out.directory);
    write_csv(join(out.directory, "final.csv"), ev.trajectory.final_state);
    report.artifact("final.csv");
  }
  if (!ev.distance.empty()) {
    std::vector<double> steps(ev.distance.size());
    for (std::size_t k = 0; k < steps.size(); ++k) steps[k] = static_cast<double>(k);
    detail::write_series_csv(join(out.directory, "distance.csv"), "step,l1_distance", steps, ev.distance);
    report.artifact("distance.csv");
  }
  if (out.snapshot_stride > 0) report.artifact("snapshots/");
  return ev;
}

// Mass drift, bounds and energy dissipation along a run.
void structural_checks(const Evolution& ev, const ProblemSpec& spec, Report& report) {
  const auto& rows = ev.trajectory.rows;
  const double m0 = rows.front().mass;
  double drift = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k)
    drift = std::max(drift, std::abs(rows[k].mass - rows[k - 1].mass) / std::max(std::abs(m0), 1e-300));
  report.check("mass_drift_per_step", drift <= 1e-10, drift, 1e-10);
  const double below = std::max(0.0, -ev.min_value), above = std::max(0.0, ev.max_value - spec.alpha);
  report.check("bounds", below <= 1e-9 && above <= 1e-9, std::max(below, above), 1e-9);
  const auto energy = energy_audit(ev.trajectory);
  report.check("energy_dissipation", energy.passed, std::max(energy.max_increase, energy.substep_excess),
               energy.slack);
  report.section("energy_audit", json::parse(to_json(energy)));
  report.note("steps " + std::to_string(ev.trajectory.steps) + ", t = " + numerics::format_double(ev.trajectory.t) +
              ", dt halvings " + std::to_string(ev.trajectory.halving_events));
}

void steady_checks(const RunConfig& c, const Evolution& ev, const ProblemSpec& spec, Report& report) {
  const auto& final_state = ev.trajectory.final_state;
  report.check("steady_detected", ev.detected, ev.fixed_point.change, ev.fixed_point.threshold);
  report.check("fixed_point", ev.fixed_point.ok, ev.fixed_point.change, ev.fixed_point.threshold);
  SteadyProfile reached;
  reached.field = final_state;
  reached.mass = final_state.mass();
  reached.verdict = check_euler_lagrange(final_state.values, final_state.grid, spec);
  reached.constants = reached.verdict.constants;
  if (reached.constants.empty()) reached.constants.push_back(std::nan(""));
  reached.kind = reached.verdict.kind == VerdictKind::multi_constant ? ProfileKind::composite
                 : spec.epsilon() > 0.0                               ? ProfileKind::regularized
                                                                      : ProfileKind::truncated;
  if (c.outputs.has("steady")) {
    detail::ensure_directory(c.outputs.directory);
    write_steady(join(c.outputs.directory, "steady"), reached);
    report.artifact("steady.csv");
    report.artifact("steady.json");
  }
  report.section("steady", json::parse(steady_json(reached)));
}

struct Setup {
  ProblemSpec spec;
  DensityField initial;
  SchemeConfig solver;
};

Setup setup(const RunConfig& c) {
  Setup s;
  s.spec = build_spec(c);
  s.initial = build_initial(c, s.spec);
  s.solver = build_solver(c);
  return s;
}

// --- commands -----------------------------------------------------------------------

void command_run(const RunConfig& c, Report& report) {
  const auto s = setup(c);
  const auto ev = evolve_with_outputs(c, s.spec, s.initial, s.solver, report);
  structural_checks(ev, s.spec, report);
  if (c.steady) steady_checks(c, ev, s.spec, report);
}

void command_steady(const RunConfig& c, Report& report) {
  const auto s = setup(c);
  const double mass = s.initial.mass();
  const auto profile = solve_mass_constant(mass, s.spec, s.initial.grid);
  detail::ensure_directory(c.outputs.directory);
  write_steady(join(c.outputs.directory, "steady"), profile);
  report.artifact("steady.csv");
  report.artifact("steady.json");
  report.section("steady", json::parse(steady_json(profile)));
  report.check("mass_match", std::abs(profile.mass - mass) <= 1e-12, std::abs(profile.mass - mass), 1e-12);
  report.check("euler_lagrange", profile.verdict.kind == VerdictKind::minimiser_compatible,
               static_cast<double>(profile.verdict.violated_cells.size()), 0.0);
  const auto fp = verify_fixed_point(profile.field, s.solver, s.spec);
  report.check("fixed_point", fp.ok, fp.change, fp.threshold);
}

void command_audit(const RunConfig& c, Report& report) {
  const auto s = setup(c);
  const Grid1D grid(c.n_cells);
  const auto contraction = contraction_audit(c.audit.pairs, c.audit.steps, s.solver, s.spec, grid, c.audit.seed);
  report.check("l1_contraction", contraction.max_l1_excess <= contraction.slack, contraction.max_l1_excess,
               contraction.slack);
  report.check("positive_part_contraction", contraction.max_positive_excess <= contraction.slack,
               contraction.max_positive_excess, contraction.slack);
  report.check("comparison", contraction.max_order_violation <= contraction.slack, contraction.max_order_violation,
               contraction.slack);

  // Ordered constant pair 0.2 alpha below 0.8 alpha.
  const double a = s.spec.alpha;
  auto run_constant = [&](double value) {
    std::vector<std::vector<double>> states;
    const auto rho0 = DensityField(grid, std::vector<double>(grid.n_cells, value));
    evolve(rho0, static_cast<double>(c.audit.steps) * s.solver.dt, s.solver, s.spec, [&](const StepEvent& e) {
      states.push_back(e.state.values);
      return true;
    });
    return states;
  };
  const auto low = run_constant(0.2 * a), high = run_constant(0.8 * a);
  double order_violation = 0.0;
  for (std::size_t n = 0; n < low.size(); ++n)
    for (std::size_t i = 0; i < grid.n_cells; ++i) order_violation = std::max(order_violation, low[n][i] - high[n][i]);
  report.check("ordered_constant_pair", order_violation <= 1e-8, std::max(order_violation, 0.0), 1e-8);

  detail::ensure_directory(c.outputs.directory);
  detail::write_text(join(c.outputs.directory, "contraction.json"), to_json(contraction));
  detail::write_text(join(c.outputs.directory, "contraction.txt"), to_text(contraction));
  report.artifact("contraction.json");
  report.artifact("contraction.txt");

  RunConfig quiet = c;
  quiet.outputs.snapshot_stride = 0;
  const auto ev = evolve_with_outputs(quiet, s.spec, s.initial, s.solver, report);
  structural_checks(ev, s.spec, report);
  const auto energy = energy_audit(ev.trajectory);
  detail::write_text(join(c.outputs.directory, "energy.json"), to_json(energy));
  detail::write_text(join(c.outputs.directory, "energy.txt"), to_text(energy));
  report.artifact("energy.json");
  report.artifact("energy.txt");
  report.section("contraction_audit", {{"pairs", contraction.pairs},
                                       {"steps", contraction.steps},
                                       {"seed", contraction.seed},
                                       {"max_l1_excess", contraction.max_l1_excess},
                                       {"max_positive_excess", contraction.max_positive_excess},
                                       {"max_order_violation", contraction.max_order_violation},
                                       {"violations", contraction.violations}});
}

// --- scenarios ------------------------------------------------------------------------

void scenario_convex(const RunConfig& c, Report& report) {
  const auto s = setup(c);
  const auto target = solve_mass_constant(s.initial.mass(), s.spec, s.initial.grid);
  const auto ev = evolve_with_outputs(c, s.spec, s.initial, s.solver, report, &target.field.values);
  structural_checks(ev, s.spec, report);
  steady_checks(c, ev, s.spec, report);

  const double err = ev.distance.back();
  report.check("distance_to_mass_constant_profile", err <= 1e-6, err, 1e-6);
  std::size_t bad = 0;
  for (std::size_t k = 11; k < ev.distance.size(); ++k)
    if (!(ev.distance[k] < ev.distance[k - 1])) ++bad;
  report.check("distance_strictly_decreasing_after_step_10", bad == 0, static_cast<double>(bad), 0.0);
  std::size_t vacuum = 0, saturated = 0;
  for (double r : target.field.values) {
    vacuum += r == 0.0;
    saturated += r == s.spec.alpha;
  }
  report.check("free_boundary_or_saturation", vacuum + saturated > 0, static_cast<double>(vacuum + saturated), 1.0);
  report.section("target", {{"constant", target.constant()},
                            {"vacuum_cells", vacuum},
                            {"saturated_cells", saturated}});
}

void scenario_barenblatt_from_above(const RunConfig& c, Report& report) {
  const auto s = setup(c);
  const auto ev = evolve_with_outputs(c, s.spec, s.initial, s.solver, report);
  structural_checks(ev, s.spec, report);
  steady_checks(c, ev, s.spec, report);

  const auto& rho = ev.trajectory.final_state.values;
  const double a = s.spec.alpha, tol = 1e-9;
  std::size_t first = rho.size(), last = 0, below = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] < a - tol) {
      first = std::min(first, i);
      last = i;
      ++below;
    }
  }
  const bool contiguous = below > 0 && last - first + 1 == below;
  const bool flanked = below > 0 && first > 0 && last + 1 < rho.size();
  report.check("unsaturated_block_contiguous", contiguous, static_cast<double>(below), 1.0);
  report.check("block_flanked_by_saturation", flanked, static_cast<double>(flanked ? rho.size() - below : 0), 2.0);

  // u = alpha - rho against the Barenblatt profile of the same u-mass.
  const auto& grid = ev.trajectory.final_state.grid;
  const double u_mass = a - ev.trajectory.final_state.mass();
  const auto profile = barenblatt(u_mass, 2.0, c.initial.center, grid, a);
  std::vector<double> expected(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) expected[i] = a - profile.field.values[i];
  const double err = l1_distance(rho, expected, grid.dx);
  report.check("matches_alpha_minus_barenblatt", err <= 1e-6, err, 1e-6);
  report.section("barenblatt", {{"u_mass", u_mass}, {"constant", profile.constant()}, {"unsaturated_cells", below}});
}

void scenario_non_minimising(const RunConfig& c, Report& report) {
  const auto s = setup(c);
  const auto ev = evolve_with_outputs(c, s.spec, s.initial, s.solver, report);
  structural_checks(ev, s.spec, report);
  steady_checks(c, ev, s.spec, report);

  const auto& final_state = ev.trajectory.final_state;
  const auto& grid = final_state.grid;
  const auto verdict = check_euler_lagrange(final_state.values, grid, s.spec);
  const bool multi = verdict.kind == VerdictKind::multi_constant && verdict.constants.size() >= 2;
  report.check("multi_constant_verdict", multi, static_cast<double>(verdict.constants.size()), 2.0);
  const double gap = multi ? std::abs(verdict.constants.front() - verdict.constants.back()) : 0.0;
  report.check("constants_differ", gap > 1e-3, gap, 1e-3);

  const double mass = final_state.mass();
  const auto single = solve_mass_constant(mass, s.spec, grid);
  const double e_reached = discrete_energy(final_state.values, grid, s.spec);
  const double e_single = discrete_energy(single.field.values, grid, s.spec);
  report.check("energy_above_single_constant_profile", e_reached > e_single, e_reached - e_single, 0.0);

  // Component masses from the initial bumps; the reached state is their composite profile.
  const double split = 0.5 * (c.initial.centers[0] + c.initial.centers[1]);
  std::vector<double> masses(2, 0.0);
  for (std::size_t i = 0; i < grid.n_cells; ++i) masses[grid.center(i) < split ? 0 : 1] += grid.dx * s.initial.values[i];
  const auto composite = composite_barenblatt(masses, c.initial.centers, 2.0, grid, s.spec.alpha);
  const double err = l1_distance(final_state.values, composite.field.values, grid.dx);
  report.check("matches_composite_profile", err <= 1e-6, err, 1e-6);
  report.section("comparison", {{"energy_reached", e_reached},
                                {"energy_single_constant", e_single},
                                {"single_constant", single.constant()},
                                {"constants", verdict.constants},
                                {"component_masses", masses}});
}

OrderStudy make_study(const RunConfig& c) {
  OrderStudy st;
  st.axis = *parse_axis(c.study.axis);
  st.spec = build_base_spec(c);
  st.initial = initial_function(c, st.spec.alpha);
  st.t_end = c.study.t_end;
  st.n_cells = c.study.n_cells;
  st.dt = c.study.dt;
  st.levels = c.study.levels;
  st.epsilons = c.study.epsilons;
  st.solver = build_solver(c);
  return st;
}

void scenario_order(const RunConfig& c, Report& report) {
  const auto fit = estimate_order(make_study(c));
  detail::ensure_directory(c.outputs.directory);
  write_order_csv(join(c.outputs.directory, "order.csv"), fit);
  detail::write_text(join(c.outputs.directory, "order.json"), to_json(fit));
  detail::write_text(join(c.outputs.directory, "order.txt"), to_text(fit));
  report.artifact("order.csv");
  report.artifact("order.json");
  report.artifact("order.txt");
  report.check("fit_valid", fit.valid, fit.r_squared, 0.0);
  report.check("fitted_order", fit.valid && fit.fitted_order >= 0.8, fit.fitted_order, 0.8);
  report.section("order", json::parse(to_json(fit)));
}

void scenario_epsilon(const RunConfig& c, Report& report) {
  const auto base = build_base_spec(c);
  const auto solver = build_solver(c);
  const auto rho0 = build_initial(c, base);
  const auto& grid = rho0.grid;
  const auto exact_step = implicit_step(rho0, solver, base).first;
  const auto exact_steady = solve_mass_constant(rho0.mass(), base, grid);

  std::vector<double> eps = c.study.epsilons, step_err, steady_err;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  for (double e : eps) {
    const auto spec = regularize(base, RegularizationParams::with_defaults(e, base.alpha));
    const auto step = implicit_step(rho0, solver, spec).first;
    step_err.push_back(l1_distance(step.values, exact_step.values, grid.dx));
    const auto steady = solve_mass_constant(rho0.mass(), spec, grid);
    steady_err.push_back(l1_distance(steady.field.values, exact_steady.field.values, grid.dx));
  }
  detail::ensure_directory(c.outputs.directory);
  std::string csv = "epsilon,step_error,steady_error\n";
  for (std::size_t k = 0; k < eps.size(); ++k)
    csv += numerics::format_double(eps[k]) + ',' + numerics::format_double(step_err[k]) + ',' +
           numerics::format_double(steady_err[k]) + '\n';
  detail::write_text(join(c.outputs.directory, "epsilon_study.csv"), csv);
  report.artifact("epsilon_study.csv");

  report.check("step_error_at_smallest_epsilon", step_err.back() <= 1e-3, step_err.back(), 1e-3);
  report.check("steady_error_at_smallest_epsilon", steady_err.back() <= 1e-3, steady_err.back(), 1e-3);
  json section = {{"epsilons", eps}, {"step_errors", step_err}, {"steady_errors", steady_err}};
  try {
    const auto fit = fit_order(eps, step_err);
    section["step_order"] = fit.fitted_order;
    report.note("step error order in epsilon " + numerics::format_double(fit.fitted_order));
  } catch (const Error&) {
    section["step_order"] = nullptr;
  }
  report.section("epsilon_study", section);
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : scenario_table()) out.push_back(k);
    return out;
  }();
  return names;
}

std::string scenario_config(std::string_view name) {
  const auto& table = scenario_table();
  const auto it = table.find(name);
  if (it == table.end()) fail(ErrorCode::validation_error, "unknown scenario '" + std::string(name) + "'");
  return it->second;
}

RunResult run_command(std::string_view command, std::string_view target, std::span<const std::string> overrides,
                      const std::optional<std::string>& out_dir) {
  const std::string cmd(command), tgt(target);
  try {
    RunConfig config;
    if (cmd == "scenario") {
      config = parse_config(scenario_config(tgt), "scenario " + tgt);
    } else if (cmd == "run" || cmd == "steady" || cmd == "audit") {
      config = load_config(tgt);
    } else {
      fail(ErrorCode::invalid_argument, "unknown command '" + cmd + "'");
    }
    for (const auto& o : overrides) apply_override(config, o);
    if (out_dir) config.outputs.directory = *out_dir;
    validate(config);

    Report report(cmd, tgt);
    if (cmd == "run") command_run(config, report);
    else if (cmd == "steady") command_steady(config, report);
    else if (cmd == "audit") command_audit(config, report);
    else if (tgt == "convex_potential") scenario_convex(config, report);
    else if (tgt == "barenblatt_from_above") scenario_barenblatt_from_above(config, report);
    else if (tgt == "non_minimising_double_well") scenario_non_minimising(config, report);
    else if (tgt == "contraction_audit") command_audit(config, report);
    else if (tgt == "order_study") scenario_order(config, report);
    else if (tgt == "epsilon_study") scenario_epsilon(config, report);
    return report.finish(config.outputs);
  } catch (const Error& e) {
    return Report::failure(cmd, tgt, e);
  } catch (const std::exception& e) {
    return Report::failure(cmd, tgt, Error(ErrorCode::internal, e.what()));
  }
}

}  // namespace satflow::app
