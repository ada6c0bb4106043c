// Exercises the shared library through its C header only.
#include <cmath>
#include <cstring>
#include <vector>

#include <doctest.h>

#include "satflow/satflow.h"

namespace {

sf_problem* logistic_quadratic(double k) {
  const double kp[] = {k};
  sf_problem_desc d{};
  d.alpha = 1.0;
  d.mobility = "logistic";
  d.diffusion = "quadratic";
  d.external = k == 0.0 ? "constant" : "harmonic";
  d.external_params = kp;
  d.external_param_count = k == 0.0 ? 0 : 1;
  sf_problem* p = nullptr;
  REQUIRE(sf_problem_create(&d, &p) == SF_OK);
  return p;
}

}  // namespace

TEST_CASE("problem handles and evaluation") {
  sf_problem* p = logistic_quadratic(10.0);
  sf_eval e{};
  REQUIRE(sf_problem_eval(p, 0.3, 0.5, &e) == SF_OK);
  CHECK(e.m == doctest::Approx(0.21));
  CHECK(e.du == doctest::Approx(0.6));
  CHECK(e.v == doctest::Approx(2.5));
  CHECK(sf_problem_eval(p, 1.5, 0.5, &e) == SF_OUT_OF_RANGE);
  double alpha = 0.0, eps = -1.0;
  int singular = -1;
  CHECK(sf_problem_info(p, &alpha, &eps, &singular) == SF_OK);
  CHECK(alpha == 1.0);
  CHECK(eps == 0.0);
  CHECK(singular == 0);

  sf_problem* r = nullptr;
  REQUIRE(sf_problem_regularize(p, 0.1, &r) == SF_OK);
  CHECK(sf_problem_info(r, nullptr, &eps, &singular) == SF_OK);
  CHECK(eps == 0.1);
  CHECK(singular == 1);
  sf_problem_destroy(r);
  sf_problem_destroy(p);
}

TEST_CASE("errors carry a status and a message") {
  sf_problem_desc d{};
  d.alpha = 1.0;
  d.mobility = "nope";
  d.diffusion = "quadratic";
  d.external = "constant";
  sf_problem* p = nullptr;
  CHECK(sf_problem_create(&d, &p) == SF_UNKNOWN_FAMILY);
  CHECK(p == nullptr);
  CHECK(std::strstr(sf_last_error_message(), "nope") != nullptr);
  CHECK(std::strcmp(sf_status_string(SF_UNKNOWN_FAMILY), "UnknownFamily") == 0);
  CHECK(sf_problem_create(nullptr, &p) == SF_INVALID_ARGUMENT);
}

TEST_CASE("flux, step and steady profile") {
  sf_problem* p = logistic_quadratic(0.0);
  const double rho[] = {0.2, 0.6};
  double f[3];
  REQUIRE(sf_flux(p, rho, 2, f) == SF_OK);
  CHECK(f[0] == 0.0);
  CHECK(f[1] == doctest::Approx(-0.768));
  CHECK(f[2] == 0.0);

  sf_solver_options o;
  sf_solver_options_default(&o);
  o.dt = 0.1;
  const double prev[] = {0.8, 0.1, 0.3};
  double next[3];
  sf_step_info info{};
  REQUIRE(sf_implicit_step(p, &o, prev, 3, next, &info) == SF_OK);
  CHECK(next[0] + next[1] + next[2] == doctest::Approx(1.2).epsilon(1e-13));
  CHECK(info.residual <= 3e-12);
  double out[3];
  size_t steps = 0;
  REQUIRE(sf_evolve(p, &o, prev, 3, 0.5, out, &steps) == SF_OK);
  CHECK(steps == 5);
  sf_problem_destroy(p);

  sf_problem* q = logistic_quadratic(10.0);
  std::vector<double> prof(64);
  double c = 0.0;
  REQUIRE(sf_steady_profile(q, 0.3, 64, prof.data(), &c) == SF_OK);
  int ok = 0;
  double change = 1.0;
  sf_solver_options_default(&o);
  REQUIRE(sf_verify_fixed_point(q, &o, prof.data(), 64, &ok, &change) == SF_OK);
  CHECK(ok == 1);
  double e = 0.0, w = 0.0, l = 0.0;
  CHECK(sf_discrete_energy(q, prof.data(), 64, &e) == SF_OK);
  CHECK(sf_w11_norm(prof.data(), 64, &w) == SF_OK);
  CHECK(sf_l1_norm(prof.data(), 64, &l) == SF_OK);
  CHECK(l == doctest::Approx(0.3));
  CHECK(sf_steady_profile(q, 0.0, 64, prof.data(), &c) == SF_MASS_OUT_OF_RANGE);
  sf_problem_destroy(q);
}

TEST_CASE("application entry points") {
  CHECK(sf_scenario_count() == 6);
  CHECK(sf_scenario_name(100) == nullptr);
  CHECK(sf_scenario_config("convex_potential") != nullptr);
  CHECK(sf_scenario_config("nope") == nullptr);
  CHECK(sf_config_key_count() > 40);

  const char* overrides[] = {"audit.pairs=4", "audit.steps=3"};
  sf_result* r = nullptr;
  REQUIRE(sf_app_run("scenario", "contraction_audit", overrides, 2, "capi_out", &r) == SF_OK);
  CHECK(sf_result_exit_code(r) == 0);
  CHECK(sf_result_check_count(r) > 3);
  const char* name = nullptr;
  int passed = 0;
  CHECK(sf_result_check(r, 0, &name, &passed, nullptr, nullptr) == SF_OK);
  CHECK(passed == 1);
  CHECK(std::strstr(sf_result_json(r), "\"checks\"") != nullptr);
  CHECK(sf_result_check(r, 999, &name, &passed, nullptr, nullptr) == SF_OUT_OF_RANGE);
  sf_result_destroy(r);
  CHECK(std::strlen(sf_version()) > 0);
}
