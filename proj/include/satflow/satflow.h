/* C interface to the saturated-mobility gradient-flow solver. All handles are
   opaque; every fallible call returns an sf_status and leaves a message for
   sf_last_error_message() on the calling thread. */
#ifndef SATFLOW_SATFLOW_H
#define SATFLOW_SATFLOW_H

#include <stddef.h>

#if defined(SATFLOW_BUILDING_LIBRARY)
#define SF_API __attribute__((visibility("default")))
#else
#define SF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status {
  SF_OK = 0,
  SF_INVALID_ARGUMENT = 1,
  SF_NON_POSITIVE_INTERIOR = 2,
  SF_INTEGRAL_DIVERGED = 3,
  SF_ANCHOR_INVALID = 4,
  SF_UNKNOWN_FAMILY = 5,
  SF_BAD_PARAMETER = 6,
  SF_OUT_OF_RANGE = 7,
  SF_ENERGY_INFINITE = 8,
  SF_SINGULAR_EVALUATION = 9,
  SF_NEWTON_DIVERGED = 10,
  SF_BOUND_VIOLATION = 11,
  SF_STEP_FAILED = 12,
  SF_MASS_OUT_OF_RANGE = 13,
  SF_BRACKET_FAILED = 14,
  SF_NON_UNIQUE_PLATEAU = 15,
  SF_SUPPORT_OVERFLOW = 16,
  SF_NO_CONVERGENCE = 17,
  SF_REFINEMENT_MISMATCH = 18,
  SF_PARSE_ERROR = 19,
  SF_VALIDATION_ERROR = 20,
  SF_IO_ERROR = 21,
  SF_INTERNAL = 99
} sf_status;

typedef struct sf_problem sf_problem;
typedef struct sf_result sf_result;

/* Families by name; see docs/config.md for the parameter lists. A tabulated
   family takes its knots followed by its values in `*_params`. */
typedef struct sf_problem_desc {
  double alpha;
  const char* mobility;
  const double* mobility_params;
  size_t mobility_param_count;
  const char* diffusion;
  const double* diffusion_params;
  size_t diffusion_param_count;
  const char* external;
  const double* external_params;
  size_t external_param_count;
} sf_problem_desc;

typedef struct sf_eval {
  double m, m1, m2, dm1, dm2;
  double u, du, ddu;
  double v, dv;
} sf_eval;

typedef struct sf_solver_options {
  double dt;
  double newton_tol;   /* <= 0: 1e-12 * N */
  int newton_max_iter;
  double damping_min;
  double clamp_margin; /* < 0: 1e-14 * alpha */
  int max_halvings;
} sf_solver_options;

typedef struct sf_step_info {
  int iterations;
  double residual;
  double energy_before;
  double energy_after;
  double dissipation;
  double linf_change;
  int used_homotopy;
  int halvings;
} sf_step_info;

SF_API sf_status sf_problem_create(const sf_problem_desc* desc, sf_problem** out);
/* New handle for the regularized problem with default parameters. */
SF_API sf_status sf_problem_regularize(const sf_problem* problem, double epsilon, sf_problem** out);
SF_API void sf_problem_destroy(sf_problem* problem);
SF_API sf_status sf_problem_info(const sf_problem* problem, double* alpha, double* epsilon, int* singular);
/* Mobility and U at density s, V at position x. */
SF_API sf_status sf_problem_eval(const sf_problem* problem, double s, double x, sf_eval* out);

SF_API sf_status sf_discrete_energy(const sf_problem* problem, const double* rho, size_t n, double* out);
SF_API sf_status sf_l1_norm(const double* values, size_t n, double* out);
SF_API sf_status sf_w11_norm(const double* values, size_t n, double* out);

SF_API void sf_solver_options_default(sf_solver_options* options);
/* n + 1 interface fluxes, including the two zero boundary fluxes. */
SF_API sf_status sf_flux(const sf_problem* problem, const double* rho, size_t n, double* flux_out);
SF_API sf_status sf_implicit_step(const sf_problem* problem, const sf_solver_options* options, const double* rho,
                                  size_t n, double* rho_out, sf_step_info* info);
SF_API sf_status sf_evolve(const sf_problem* problem, const sf_solver_options* options, const double* rho0, size_t n,
                           double t_end, double* rho_out, size_t* steps_out);
/* Mass-constrained steady profile; `constant` receives C. */
SF_API sf_status sf_steady_profile(const sf_problem* problem, double mass, size_t n, double* rho_out,
                                   double* constant);
SF_API sf_status sf_verify_fixed_point(const sf_problem* problem, const sf_solver_options* options,
                                       const double* rho, size_t n, int* ok, double* change);

/* command: "run", "steady", "audit" (target: config path) or "scenario"
   (target: scenario name). SF_OK means the command ran; the outcome is in
   sf_result_exit_code. out_dir may be NULL. */
SF_API sf_status sf_app_run(const char* command, const char* target, const char* const* overrides,
                            size_t override_count, const char* out_dir, sf_result** out);
SF_API int sf_result_exit_code(const sf_result* result);
SF_API const char* sf_result_summary(const sf_result* result);
SF_API const char* sf_result_json(const sf_result* result);
SF_API size_t sf_result_check_count(const sf_result* result);
SF_API sf_status sf_result_check(const sf_result* result, size_t index, const char** name, int* passed,
                                 double* value, double* threshold);
SF_API void sf_result_destroy(sf_result* result);

SF_API size_t sf_scenario_count(void);
SF_API const char* sf_scenario_name(size_t index);
/* Default configuration text of a scenario, NULL if unknown. */
SF_API const char* sf_scenario_config(const char* name);
SF_API size_t sf_config_key_count(void);
SF_API const char* sf_config_key(size_t index);

SF_API const char* sf_status_string(sf_status status);
SF_API const char* sf_last_error_message(void);
SF_API const char* sf_version(void);

#ifdef __cplusplus
}
#endif

#endif
