#include "satflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "satflow/error.hpp"
#include "satflow/numerics.hpp"

namespace satflow {

using json = nlohmann::ordered_json;

// --- order fits ------------------------------------------------------------------

OrderFit fit_order(std::span<const double> resolutions, std::span<const double> errors) {
  if (resolutions.size() != errors.size() || resolutions.size() < 3)
    fail(ErrorCode::refinement_mismatch, "order fit needs at least 3 matching levels");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < resolutions.size(); ++k) {
    if (k > 0 && !(resolutions[k] < resolutions[k - 1]))
      fail(ErrorCode::refinement_mismatch, "order fit needs strictly decreasing resolutions");
    if (!(errors[k] > 0.0) || !std::isfinite(errors[k]))
      fail(ErrorCode::refinement_mismatch, "order fit is degenerate: an error is zero or not finite");
    lx.push_back(std::log(resolutions[k]));
    ly.push_back(std::log(errors[k]));
  }
  const auto line = numerics::least_squares_line(lx, ly);
  OrderFit fit;
  fit.resolutions.assign(resolutions.begin(), resolutions.end());
  fit.errors.assign(errors.begin(), errors.end());
  fit.fitted_order = line.slope;
  fit.r_squared = line.r_squared;
  fit.valid = true;
  return fit;
}

const char* to_string(RefinementAxis axis) {
  switch (axis) {
    case RefinementAxis::dx_dt_joint: return "dx_dt_joint";
    case RefinementAxis::dt_only: return "dt_only";
    case RefinementAxis::dx_only: return "dx_only";
    case RefinementAxis::epsilon: return "epsilon";
  }
  return "unknown";
}

std::optional<RefinementAxis> parse_axis(std::string_view name) {
  for (auto a : {RefinementAxis::dx_dt_joint, RefinementAxis::dt_only, RefinementAxis::dx_only, RefinementAxis::epsilon})
    if (name == to_string(a)) return a;
  return std::nullopt;
}

std::vector<double> restrict_to(std::span<const double> fine, std::size_t n_coarse) {
  if (n_coarse == 0 || fine.size() % n_coarse != 0) {
    std::ostringstream msg;
    msg << "cannot aggregate " << fine.size() << " cells onto " << n_coarse;
    fail(ErrorCode::refinement_mismatch, msg.str());
  }
  const std::size_t r = fine.size() / n_coarse;
  std::vector<double> out(n_coarse, 0.0);
  for (std::size_t i = 0; i < n_coarse; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < r; ++k) s += fine[i * r + k];
    out[i] = s / static_cast<double>(r);
  }
  return out;
}

namespace {

struct Level {
  std::size_t n;
  double dt;
  double epsilon;  // 0: unregularized
  double resolution;
};

// States at t = j * sample_dt, j = 1..samples.
std::vector<std::vector<double>> sampled_run(const OrderStudy& study, const Level& level, double sample_dt,
                                             std::size_t samples) {
  const ProblemSpec spec = level.epsilon > 0.0
                               ? regularize(study.spec, RegularizationParams::with_defaults(level.epsilon, study.spec.alpha))
                               : study.spec;
  const Grid1D grid(level.n);
  auto rho0 = project_initial(study.initial, grid, spec.alpha);
  if (spec.singular()) {
    const double d = study.solver.margin(spec.alpha);
    for (auto& r : rho0.values) r = std::clamp(r, d, spec.alpha - d);
  }
  SchemeConfig config = study.solver;
  config.dt = level.dt;
  const std::size_t ratio = nominal_steps(sample_dt, level.dt);
  std::vector<std::vector<double>> out;
  evolve(rho0, static_cast<double>(samples) * sample_dt, config, spec, [&](const StepEvent& ev) {
    if (ev.step % ratio == 0) out.push_back(ev.state.values);
    return true;
  });
  return out;
}

}  // namespace

OrderFit estimate_order(const OrderStudy& study) {
  if (!study.initial) fail(ErrorCode::invalid_argument, "order study needs an initial datum");
  std::vector<Level> levels;
  Level ref{};
  const std::size_t L = study.axis == RefinementAxis::epsilon ? study.epsilons.size() : study.levels;
  if (L < 3) fail(ErrorCode::refinement_mismatch, "order study needs at least 3 levels");
  const double scale = std::ldexp(1.0, static_cast<int>(L) - 1);
  for (std::size_t k = 0; k < L; ++k) {
    const double f = std::ldexp(1.0, static_cast<int>(k));
    const auto nk = study.n_cells << k;
    switch (study.axis) {
      case RefinementAxis::dx_dt_joint: levels.push_back({nk, study.dt / f, 0.0, 1.0 / static_cast<double>(nk)}); break;
      case RefinementAxis::dt_only: levels.push_back({study.n_cells, study.dt / f, 0.0, study.dt / f}); break;
      case RefinementAxis::dx_only: levels.push_back({nk, study.dt, 0.0, 1.0 / static_cast<double>(nk)}); break;
      case RefinementAxis::epsilon:
        levels.push_back({study.n_cells, study.dt, study.epsilons[k], study.epsilons[k]});
        break;
    }
  }
  const std::size_t n_fine = study.n_cells << (L - 1);
  switch (study.axis) {
    case RefinementAxis::dx_dt_joint: ref = {4 * n_fine, study.dt / scale / 4.0, 0.0, 0.0}; break;
    case RefinementAxis::dt_only: ref = {study.n_cells, study.dt / scale / 4.0, 0.0, 0.0}; break;
    case RefinementAxis::dx_only: ref = {4 * n_fine, study.dt, 0.0, 0.0}; break;
    case RefinementAxis::epsilon: ref = {study.n_cells, study.dt, 0.0, 0.0}; break;
  }
  const double sample_dt = study.dt;
  const std::size_t samples = nominal_steps(study.t_end, sample_dt);
  if (samples == 0) fail(ErrorCode::invalid_argument, "order study needs t_end >= dt");

  auto ref_future = std::async(std::launch::async, [&] { return sampled_run(study, ref, sample_dt, samples); });
  std::vector<std::future<std::vector<std::vector<double>>>> runs;
  for (const auto& level : levels)
    runs.push_back(std::async(std::launch::async, [&study, level, sample_dt, samples] {
      return sampled_run(study, level, sample_dt, samples);
    }));
  const auto reference = ref_future.get();

  std::vector<double> res, err;
  bool above_floor = false;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto states = runs[k].get();
    const double dx = 1.0 / static_cast<double>(levels[k].n);
    double worst = 0.0;
    for (std::size_t j = 0; j < std::min(states.size(), reference.size()); ++j) {
      const auto r = restrict_to(reference[j], levels[k].n);
      double s = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) s += std::abs(states[j][i] - r[i]);
      worst = std::max(worst, dx * s);
    }
    const double floor = study.noise_floor > 0.0 ? study.noise_floor : 10.0 * study.solver.tolerance(levels[k].n) * dx;
    if (worst > floor) above_floor = true;
    res.push_back(levels[k].resolution);
    err.push_back(worst);
  }
  OrderFit fit;
  if (!above_floor) {
    fit.resolutions = res;
    fit.errors = err;
    fit.fitted_order = std::numeric_limits<double>::quiet_NaN();
    fit.valid = false;
  } else {
    fit = fit_order(res, err);
  }
  fit.axis = to_string(study.axis);
  return fit;
}

// --- steady detection -------------------------------------------------------------

const char* to_string(SteadyCriterion c) {
  switch (c) {
    case SteadyCriterion::step_change: return "step_change";
    case SteadyCriterion::energy_plateau: return "energy_plateau";
    case SteadyCriterion::w11_step: return "w11_step";
  }
  return "unknown";
}

std::optional<SteadyCriterion> parse_criterion(std::string_view name) {
  for (auto c : {SteadyCriterion::step_change, SteadyCriterion::energy_plateau, SteadyCriterion::w11_step})
    if (name == to_string(c)) return c;
  return std::nullopt;
}

void SteadyDetector::validate() const {
  if (!(tol_rate > 0.0) || !(tol_energy > 0.0)) fail(ErrorCode::bad_parameter, "steady: tolerances must be positive");
  if (patience < 1) fail(ErrorCode::bad_parameter, "steady: patience must be at least 1");
  if (max_steps < 1) fail(ErrorCode::bad_parameter, "steady: max_steps must be at least 1");
}

SteadyRun run_to_steady(const DensityField& rho0, const SchemeConfig& config, const ProblemSpec& spec,
                        const SteadyDetector& detector, const StepObserver& observer) {
  detector.validate();
  SteadyRun out;
  int streak = 0;
  std::vector<double> prev = rho0.values;
  std::vector<double> diff(prev.size());
  const double dx = rho0.grid.dx;
  auto watch = [&](const StepEvent& ev) {
    if (observer && !observer(ev)) return false;
    bool fires = false;
    for (std::size_t i = 0; i < prev.size(); ++i) diff[i] = ev.state.values[i] - prev[i];
    switch (detector.criterion) {
      case SteadyCriterion::step_change: fires = l1_norm(diff, dx) / config.dt < detector.tol_rate; break;
      case SteadyCriterion::w11_step: fires = w_minus_1_1_norm(diff, dx) / config.dt < detector.tol_rate; break;
      case SteadyCriterion::energy_plateau:
        fires = std::abs(ev.report.energy_before - ev.report.energy_after) < detector.tol_energy;
        break;
    }
    prev = ev.state.values;
    streak = fires ? streak + 1 : 0;
    if (streak >= detector.patience) {
      out.fixed_point = verify_fixed_point(ev.state, config, spec);
      if (out.fixed_point.ok) {
        out.detected = true;
        return false;
      }
      streak = 0;
    }
    return true;
  };
  out.trajectory = evolve(rho0, static_cast<double>(detector.max_steps) * config.dt, config, spec, watch);
  if (!out.detected && !out.trajectory.stopped_early) {
    std::ostringstream msg;
    msg << "no steady state detected within " << detector.max_steps << " steps";
    fail(ErrorCode::no_convergence, msg.str());
  }
  return out;
}

// --- audits -------------------------------------------------------------------------

std::vector<double> random_density(std::size_t n, double alpha, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.05 * alpha, 0.95 * alpha);
  std::vector<double> raw(n);
  for (auto& r : raw) r = dist(rng);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = raw[i == 0 ? 0 : i - 1], right = raw[i + 1 == n ? i : i + 1];
    out[i] = 0.25 * (left + 2.0 * raw[i] + right);
  }
  return out;
}

namespace {

std::vector<std::vector<double>> run_states(const DensityField& rho0, std::size_t steps, const SchemeConfig& config,
                                            const ProblemSpec& spec) {
  std::vector<std::vector<double>> out{rho0.values};
  evolve(rho0, static_cast<double>(steps) * config.dt, config, spec, [&](const StepEvent& ev) {
    out.push_back(ev.state.values);
    return true;
  });
  return out;
}

ContractionPair audit_pair(std::size_t index, std::size_t steps, const SchemeConfig& config, const ProblemSpec& spec,
                           const Grid1D& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed + index);
  const auto a0 = random_density(grid.n_cells, spec.alpha, rng);
  const auto b0 = random_density(grid.n_cells, spec.alpha, rng);
  std::vector<double> lo0(a0.size()), hi0(a0.size());
  for (std::size_t i = 0; i < a0.size(); ++i) {
    lo0[i] = std::min(a0[i], b0[i]);
    hi0[i] = std::max(a0[i], b0[i]);
  }
  const auto a = run_states(DensityField(grid, a0), steps, config, spec);
  const auto b = run_states(DensityField(grid, b0), steps, config, spec);
  const auto lo = run_states(DensityField(grid, lo0), steps, config, spec);
  const auto hi = run_states(DensityField(grid, hi0), steps, config, spec);

  auto l1 = [](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
    return s;
  };
  auto pos = [](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::max(0.0, x[i] - y[i]);
    return s;
  };
  ContractionPair p;
  p.index = index;
  p.initial_l1 = l1(a[0], b[0]);
  const double pos0 = pos(a[0], b[0]);
  p.l1_excess = -std::numeric_limits<double>::infinity();
  p.positive_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < a.size(); ++n) {
    p.l1_excess = std::max(p.l1_excess, l1(a[n], b[n]) - p.initial_l1);
    p.positive_excess = std::max(p.positive_excess, pos(a[n], b[n]) - pos0);
    for (std::size_t i = 0; i < lo[n].size(); ++i) p.order_violation = std::max(p.order_violation, lo[n][i] - hi[n][i]);
  }
  if (a.size() == 1) p.l1_excess = p.positive_excess = 0.0;
  return p;
}

}  // namespace

ContractionReport contraction_audit(std::size_t pairs, std::size_t steps, const SchemeConfig& config,
                                    const ProblemSpec& spec, const Grid1D& grid, std::uint64_t seed, double slack) {
  ContractionReport report;
  report.pairs = pairs;
  report.steps = steps;
  report.seed = seed;
  report.slack = slack;
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<std::vector<ContractionPair>>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      std::vector<ContractionPair> mine;
      for (std::size_t p = w; p < pairs; p += workers) mine.push_back(audit_pair(p, steps, config, spec, grid, seed));
      return mine;
    }));
  }
  for (auto& j : jobs)
    for (auto& p : j.get()) report.entries.push_back(p);
  std::sort(report.entries.begin(), report.entries.end(),
            [](const ContractionPair& x, const ContractionPair& y) { return x.index < y.index; });
  for (const auto& p : report.entries) {
    report.max_l1_excess = std::max(report.max_l1_excess, p.l1_excess);
    report.max_positive_excess = std::max(report.max_positive_excess, p.positive_excess);
    report.max_order_violation = std::max(report.max_order_violation, p.order_violation);
    if (p.l1_excess > slack || p.positive_excess > slack || p.order_violation > slack) ++report.violations;
  }
  report.passed = report.violations == 0;
  return report;
}

EnergyReport energy_audit(const Trajectory& trajectory) {
  EnergyReport report;
  const auto& rows = trajectory.rows;
  report.steps = rows.empty() ? 0 : rows.size() - 1;
  report.substep_excess = std::max(0.0, trajectory.max_energy_excess);
  for (std::size_t n = 0; n + 1 < rows.size(); ++n) {
    const double e0 = rows[n].energy, e1 = rows[n + 1].energy;
    if (std::isnan(e0) || std::isnan(e1)) continue;
    report.max_increase = std::max(report.max_increase, e1 - e0 - 1e-9 * (1.0 + std::abs(e0)));
  }
  std::vector<std::size_t> ks;
  for (std::size_t k : {std::size_t{1}, std::size_t{10}, report.steps})
    if (k >= 1 && k <= report.steps && std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
  std::vector<double> cumulative(rows.size(), 0.0);
  for (std::size_t n = 1; n < rows.size(); ++n) cumulative[n] = cumulative[n - 1] + rows[n].dissipation;
  bool windows_ok = true;
  for (std::size_t k : ks) {
    EnergyWindow w;
    w.k = k;
    w.max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n + k < rows.size(); ++n) {
      const double e0 = rows[n].energy, e1 = rows[n + k].energy;
      if (std::isnan(e0) || std::isnan(e1)) continue;
      w.max_excess = std::max(w.max_excess, (cumulative[n + k] - cumulative[n]) - (e0 - e1));
    }
    if (w.max_excess > report.slack) windows_ok = false;
    report.windows.push_back(w);
  }
  report.passed = report.max_increase <= 0.0 && windows_ok && report.substep_excess <= report.slack;
  return report;
}

// --- emission -----------------------------------------------------------------------

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

}  // namespace

std::string to_json(const OrderFit& fit) {
  json j;
  j["axis"] = fit.axis;
  j["resolutions"] = fit.resolutions;
  j["errors"] = fit.errors;
  j["fitted_order"] = finite_or_null(fit.fitted_order);
  j["r_squared"] = finite_or_null(fit.r_squared);
  j["valid"] = fit.valid;
  return j.dump(2) + "\n";
}

std::string to_json(const ContractionReport& r) {
  json j;
  j["pairs"] = r.pairs;
  j["steps"] = r.steps;
  j["seed"] = r.seed;
  j["slack"] = r.slack;
  j["max_l1_excess"] = r.max_l1_excess;
  j["max_positive_excess"] = r.max_positive_excess;
  j["max_order_violation"] = r.max_order_violation;
  j["violations"] = r.violations;
  j["passed"] = r.passed;
  json entries = json::array();
  for (const auto& p : r.entries)
    entries.push_back({{"index", p.index},
                       {"initial_l1", p.initial_l1},
                       {"l1_excess", p.l1_excess},
                       {"positive_excess", p.positive_excess},
                       {"order_violation", p.order_violation}});
  j["entries"] = entries;
  return j.dump(2) + "\n";
}

std::string to_json(const EnergyReport& r) {
  json j;
  j["steps"] = r.steps;
  j["max_increase"] = r.max_increase;
  j["substep_excess"] = r.substep_excess;
  json windows = json::array();
  for (const auto& w : r.windows) windows.push_back({{"k", w.k}, {"max_excess", finite_or_null(w.max_excess)}});
  j["windows"] = windows;
  j["slack"] = r.slack;
  j["passed"] = r.passed;
  return j.dump(2) + "\n";
}

std::string to_text(const OrderFit& fit) {
  std::ostringstream out;
  out << "order study (" << fit.axis << ")\n";
  out << "  resolution          error\n";
  for (std::size_t k = 0; k < fit.resolutions.size(); ++k)
    out << "  " << fmt("%-18.6e", fit.resolutions[k]) << "  " << fmt("%.6e", fit.errors[k]) << '\n';
  if (fit.valid)
    out << "  fitted order " << fmt("%.4f", fit.fitted_order) << ", r^2 " << fmt("%.4f", fit.r_squared) << '\n';
  else
    out << "  no fit: errors below the noise floor\n";
  return out.str();
}

std::string to_text(const ContractionReport& r) {
  std::ostringstream out;
  out << "contraction audit: " << r.pairs << " pairs x " << r.steps << " steps, seed " << r.seed << '\n';
  out << "  max L1 excess        " << fmt("%.3e", r.max_l1_excess) << '\n';
  out << "  max positive excess  " << fmt("%.3e", r.max_positive_excess) << '\n';
  out << "  max order violation  " << fmt("%.3e", r.max_order_violation) << '\n';
  out << "  violations           " << r.violations << (r.passed ? "  (pass)" : "  (FAIL)") << '\n';
  return out.str();
}

std::string to_text(const EnergyReport& r) {
  std::ostringstream out;
  out << "energy audit: " << r.steps << " steps\n";
  out << "  max step increase    " << fmt("%.3e", r.max_increase) << '\n';
  out << "  max sub-step excess  " << fmt("%.3e", r.substep_excess) << '\n';
  for (const auto& w : r.windows) out << "  window k=" << w.k << "  excess " << fmt("%.3e", w.max_excess) << '\n';
  out << (r.passed ? "  pass\n" : "  FAIL\n");
  return out.str();
}

void write_order_csv(const std::string& path, const OrderFit& fit) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  out << "resolution,error\n";
  for (std::size_t k = 0; k < fit.resolutions.size(); ++k)
    out << numerics::format_double(fit.resolutions[k]) << ',' << numerics::format_double(fit.errors[k]) << '\n';
}

}  // namespace satflow
