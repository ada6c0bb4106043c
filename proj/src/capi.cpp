#include "satflow/satflow.h"

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "satflow/app.hpp"
#include "satflow/diagnostics.hpp"
#include "satflow/steady.hpp"

struct sf_problem {
  satflow::ProblemSpec spec;
};

struct sf_result {
  satflow::app::RunResult result;
};

namespace {

using namespace satflow;

thread_local std::string last_error;

sf_status record(ErrorCode code, const std::string& message) {
  last_error = message;
  return static_cast<sf_status>(code);
}

template <class F>
sf_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return SF_OK;
  } catch (const Error& e) {
    return record(e.code(), e.what());
  } catch (const std::exception& e) {
    return record(ErrorCode::internal, e.what());
  } catch (...) {
    return record(ErrorCode::internal, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::invalid_argument, what);
}

std::span<const double> params(const double* p, std::size_t n) {
  if (n > 0) require(p != nullptr, "parameter pointer is null");
  return {p, n};
}

SchemeConfig scheme_config(const sf_solver_options* o) {
  SchemeConfig c;
  if (!o) return c;
  c.dt = o->dt;
  if (o->newton_tol > 0.0) c.newton_tol = o->newton_tol;
  c.newton_max_iter = o->newton_max_iter;
  c.damping_min = o->damping_min;
  if (o->clamp_margin >= 0.0) c.clamp_margin = o->clamp_margin;
  c.max_halvings = o->max_halvings;
  c.validate();
  return c;
}

DensityField field(const double* rho, std::size_t n) {
  require(rho != nullptr, "density pointer is null");
  require(n >= 2, "at least two cells are required");
  return DensityField(Grid1D(n), std::vector<double>(rho, rho + n));
}

const std::map<std::string, std::string>& scenario_texts() {
  static const std::map<std::string, std::string> texts = [] {
    std::map<std::string, std::string> out;
    for (const auto& name : app::scenario_names()) out[name] = app::scenario_config(name);
    return out;
  }();
  return texts;
}

}  // namespace

extern "C" {

sf_status sf_problem_create(const sf_problem_desc* desc, sf_problem** out) {
  return guarded([&] {
    require(desc && out, "null argument");
    require(desc->mobility && desc->diffusion && desc->external, "family name is null");
    auto p = std::make_unique<sf_problem>();
    p->spec.alpha = desc->alpha;
    require(desc->alpha > 0.0, "alpha must be positive");
    p->spec.mobility = make_mobility(desc->mobility, params(desc->mobility_params, desc->mobility_param_count),
                                     desc->alpha);
    p->spec.potential = make_diffusion(desc->diffusion, params(desc->diffusion_params, desc->diffusion_param_count),
                                       desc->alpha);
    p->spec.external = make_external(desc->external, params(desc->external_params, desc->external_param_count));
    p->spec.validate();
    *out = p.release();
  });
}

sf_status sf_problem_regularize(const sf_problem* problem, double epsilon, sf_problem** out) {
  return guarded([&] {
    require(problem && out, "null argument");
    auto p = std::make_unique<sf_problem>();
    p->spec = regularize(problem->spec, RegularizationParams::with_defaults(epsilon, problem->spec.alpha));
    *out = p.release();
  });
}

void sf_problem_destroy(sf_problem* problem) { delete problem; }

sf_status sf_problem_info(const sf_problem* problem, double* alpha, double* epsilon, int* singular) {
  return guarded([&] {
    require(problem != nullptr, "null problem");
    if (alpha) *alpha = problem->spec.alpha;
    if (epsilon) *epsilon = problem->spec.epsilon();
    if (singular) *singular = problem->spec.singular() ? 1 : 0;
  });
}

sf_status sf_problem_eval(const sf_problem* problem, double s, double x, sf_eval* out) {
  return guarded([&] {
    require(problem && out, "null argument");
    const auto& sp = problem->spec;
    if (!(s >= 0.0 && s <= sp.alpha)) fail(ErrorCode::out_of_range, "density outside [0, alpha]");
    if (!(x >= 0.0 && x <= 1.0)) fail(ErrorCode::out_of_range, "position outside [0, 1]");
    out->m1 = sp.mobility.m1(s);
    out->m2 = sp.mobility.m2(s);
    out->dm1 = sp.mobility.dm1(s);
    out->dm2 = sp.mobility.dm2(s);
    out->m = out->m1 * out->m2;
    out->u = sp.potential.u(s);
    out->du = sp.potential.du(s);
    out->ddu = sp.potential.ddu(s);
    out->v = sp.external.v(x);
    out->dv = sp.external.dv(x);
  });
}

sf_status sf_discrete_energy(const sf_problem* problem, const double* rho, size_t n, double* out) {
  return guarded([&] {
    require(problem && out, "null argument");
    const auto f = field(rho, n);
    *out = discrete_energy(f.values, f.grid, problem->spec);
  });
}

sf_status sf_l1_norm(const double* values, size_t n, double* out) {
  return guarded([&] {
    require(values && out && n > 0, "null or empty argument");
    *out = l1_norm({values, n}, 1.0 / static_cast<double>(n));
  });
}

sf_status sf_w11_norm(const double* values, size_t n, double* out) {
  return guarded([&] {
    require(values && out && n > 0, "null or empty argument");
    *out = w_minus_1_1_norm({values, n}, 1.0 / static_cast<double>(n));
  });
}

void sf_solver_options_default(sf_solver_options* options) {
  if (!options) return;
  const SchemeConfig c;
  options->dt = c.dt;
  options->newton_tol = 0.0;
  options->newton_max_iter = c.newton_max_iter;
  options->damping_min = c.damping_min;
  options->clamp_margin = -1.0;
  options->max_halvings = c.max_halvings;
}

sf_status sf_flux(const sf_problem* problem, const double* rho, size_t n, double* flux_out) {
  return guarded([&] {
    require(problem && flux_out, "null argument");
    const auto f = field(rho, n);
    const auto fl = flux(f.values, f.grid, problem->spec);
    std::copy(fl.begin(), fl.end(), flux_out);
  });
}

sf_status sf_implicit_step(const sf_problem* problem, const sf_solver_options* options, const double* rho, size_t n,
                           double* rho_out, sf_step_info* info) {
  return guarded([&] {
    require(problem && rho_out, "null argument");
    const auto [next, report] = implicit_step(field(rho, n), scheme_config(options), problem->spec);
    std::copy(next.values.begin(), next.values.end(), rho_out);
    if (info) {
      info->iterations = report.iterations;
      info->residual = report.residual;
      info->energy_before = report.energy_before;
      info->energy_after = report.energy_after;
      info->dissipation = report.dissipation;
      info->linf_change = report.linf_change;
      info->used_homotopy = report.used_homotopy ? 1 : 0;
      info->halvings = report.halvings;
    }
  });
}

sf_status sf_evolve(const sf_problem* problem, const sf_solver_options* options, const double* rho0, size_t n,
                    double t_end, double* rho_out, size_t* steps_out) {
  return guarded([&] {
    require(problem && rho_out, "null argument");
    const auto traj = evolve(field(rho0, n), t_end, scheme_config(options), problem->spec);
    std::copy(traj.final_state.values.begin(), traj.final_state.values.end(), rho_out);
    if (steps_out) *steps_out = traj.steps;
  });
}

sf_status sf_steady_profile(const sf_problem* problem, double mass, size_t n, double* rho_out, double* constant) {
  return guarded([&] {
    require(problem && rho_out && n >= 2, "null argument or fewer than two cells");
    const auto profile = solve_mass_constant(mass, problem->spec, Grid1D(n));
    std::copy(profile.field.values.begin(), profile.field.values.end(), rho_out);
    if (constant) *constant = profile.constant();
  });
}

sf_status sf_verify_fixed_point(const sf_problem* problem, const sf_solver_options* options, const double* rho,
                                size_t n, int* ok, double* change) {
  return guarded([&] {
    require(problem != nullptr, "null problem");
    const auto check = verify_fixed_point(field(rho, n), scheme_config(options), problem->spec);
    if (ok) *ok = check.ok ? 1 : 0;
    if (change) *change = check.change;
  });
}

sf_status sf_app_run(const char* command, const char* target, const char* const* overrides, size_t override_count,
                     const char* out_dir, sf_result** out) {
  return guarded([&] {
    require(command && target && out, "null argument");
    std::vector<std::string> ov;
    for (size_t i = 0; i < override_count; ++i) {
      require(overrides && overrides[i], "null override");
      ov.emplace_back(overrides[i]);
    }
    std::optional<std::string> dir;
    if (out_dir) dir = out_dir;
    auto r = std::make_unique<sf_result>();
    r->result = app::run_command(command, target, ov, dir);
    *out = r.release();
  });
}

int sf_result_exit_code(const sf_result* result) { return result ? result->result.exit_code : app::exit_solver; }
const char* sf_result_summary(const sf_result* result) { return result ? result->result.summary.c_str() : ""; }
const char* sf_result_json(const sf_result* result) { return result ? result->result.json.c_str() : ""; }
size_t sf_result_check_count(const sf_result* result) { return result ? result->result.checks.size() : 0; }

sf_status sf_result_check(const sf_result* result, size_t index, const char** name, int* passed, double* value,
                          double* threshold) {
  return guarded([&] {
    require(result != nullptr, "null result");
    if (index >= result->result.checks.size()) fail(ErrorCode::out_of_range, "check index out of range");
    const auto& c = result->result.checks[index];
    if (name) *name = c.name.c_str();
    if (passed) *passed = c.passed ? 1 : 0;
    if (value) *value = c.value;
    if (threshold) *threshold = c.threshold;
  });
}

void sf_result_destroy(sf_result* result) { delete result; }

size_t sf_scenario_count(void) { return app::scenario_names().size(); }

const char* sf_scenario_name(size_t index) {
  const auto& names = app::scenario_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

const char* sf_scenario_config(const char* name) {
  if (!name) return nullptr;
  const auto& texts = scenario_texts();
  const auto it = texts.find(name);
  return it == texts.end() ? nullptr : it->second.c_str();
}

size_t sf_config_key_count(void) { return app::config_keys().size(); }

const char* sf_config_key(size_t index) {
  static const std::vector<std::string> keys = app::config_keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

const char* sf_status_string(sf_status status) { return to_string(static_cast<ErrorCode>(status)); }
const char* sf_last_error_message(void) { return last_error.c_str(); }
const char* sf_version(void) { return "0.1.0"; }

}  // extern "C"
