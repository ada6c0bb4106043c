#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <doctest.h>

#include "satflow/app.hpp"
#include "support.hpp"

using namespace satflow;
using namespace satflow::app;
namespace fs = std::filesystem;

namespace {

const char* minimal = R"(# minimal
problem.mobility = logistic
problem.u = quadratic
problem.v = harmonic
problem.v_params = 1
initial.kind = constant
initial.value = 0.4
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::path("app_test") / name;
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("minimal config parses and validates") {
  const auto c = parse_config(minimal);
  CHECK(c.problem.mobility == "logistic");
  CHECK(c.problem.v_params == std::vector<double>{1.0});
  CHECK(c.initial.value == 0.4);
  validate(c);
  const auto spec = build_spec(c);
  CHECK_FALSE(spec.regularization.has_value());
  const auto rho = build_initial(c, spec);
  CHECK(rho.size() == 64);
}

TEST_CASE("unknown keys and bad values are parse errors with a location") {
  const std::string text = std::string(minimal) + "grid.n_cels = 10\n";
  CHECK(test::code_of([&] { parse_config(text, "x.cfg"); }) == ErrorCode::parse_error);
  const auto msg = message_of([&] { parse_config(text, "x.cfg"); });
  CHECK(msg.find("x.cfg:8") != std::string::npos);
  CHECK(msg.find("grid.n_cels") != std::string::npos);
  CHECK(test::code_of([] { parse_config("time.dt = fast\n"); }) == ErrorCode::parse_error);
  CHECK(test::code_of([] { parse_config("grid.n_cells = 3.5\n"); }) == ErrorCode::parse_error);
  CHECK(test::code_of([] { parse_config("time.steady = maybe\n"); }) == ErrorCode::parse_error);
  CHECK(test::code_of([] { parse_config("no equals sign\n"); }) == ErrorCode::parse_error);
}

TEST_CASE("number forms") {
  const auto c = parse_config("time.dt = 2^-7\ntime.t_end = 1/4\nproblem.v_params = 0, 0.5 -0.5\n");
  CHECK(c.dt == 1.0 / 128.0);
  CHECK(c.t_end == 0.25);
  CHECK(c.problem.v_params == std::vector<double>{0.0, 0.5, -0.5});
}

TEST_CASE("validation lists every problem at once") {
  auto c = parse_config(minimal);
  c.problem.u = "cubic";
  c.n_cells = 1;
  c.dt = 0.0;
  CHECK(test::code_of([&] { validate(c); }) == ErrorCode::validation_error);
  const auto msg = message_of([&] { validate(c); });
  CHECK(msg.find("3 configuration problems") != std::string::npos);
  CHECK(msg.find("cubic") != std::string::npos);
}

TEST_CASE("two-bump masses beyond the bump capacity are rejected") {
  auto c = parse_config(std::string(minimal) +
                        "initial.kind = two_bump\ninitial.radius = 0.2\ninitial.centers = 0.25, 0.75\n"
                        "initial.masses = 0.002, 0.0006\n");
  validate(c);
  c.initial.masses = {0.003, 0.0006};  // capacity is 0.2^3 / 3
  const auto msg = message_of([&] { validate(c); });
  CHECK(msg.find("capacity") != std::string::npos);
  c.initial.masses = {0.002, 0.0006};
  c.initial.centers = {0.4, 0.6};
  CHECK(message_of([&] { validate(c); }).find("overlap") != std::string::npos);
}

TEST_CASE("overrides") {
  auto c = parse_config(minimal);
  apply_override(c, "grid.n_cells=32");
  apply_override(c, "regularization.epsilon = 0.1");
  CHECK(c.n_cells == 32);
  CHECK(c.regularization.epsilon == 0.1);
  CHECK(build_spec(c).epsilon() == 0.1);
  CHECK(test::code_of([&] { apply_override(c, "grid.n_cells"); }) == ErrorCode::parse_error);
  CHECK(test::code_of([&] { apply_override(c, "grid.bogus=1"); }) == ErrorCode::parse_error);
}

TEST_CASE("shipped convex config reproduces the experiment setup") {
  const auto c = load_config(SATFLOW_SOURCE_DIR "/configs/convex.cfg");
  validate(c);
  CHECK(c.problem.mobility == "logistic");
  CHECK(c.problem.u == "quadratic");
  CHECK(c.problem.v == "harmonic");
  CHECK(c.problem.v_params == std::vector<double>{10.0});
  CHECK(c.dt == 1.0 / 128.0);
  CHECK(c.n_cells == 128);
  const auto spec = build_spec(c);
  CHECK(spec.mobility(0.3) == doctest::Approx(0.21));
  CHECK(spec.external.v(0.5) == doctest::Approx(2.5));
}

TEST_CASE("every config key is accepted by the parser") {
  for (const auto& key : config_keys()) {
    const auto msg = message_of([&] { parse_config(key + " = 1\n"); });
    CHECK_MESSAGE(msg.find("unknown key") == std::string::npos, key);
  }
}

TEST_CASE("initial data registry") {
  auto c = parse_config(minimal);
  c.n_cells = 100;
  for (const char* kind : {"constant", "cosine", "gaussian", "indicator"}) {
    c.initial.kind = kind;
    c.initial.center = 0.5;
    c.initial.width = 0.1;
    c.initial.height = 0.3;
    c.initial.value = 0.4;
    validate(c);
    const auto rho = build_initial(c, build_spec(c));
    for (double r : rho.values) CHECK((r >= 0.0 && r <= 1.0));
  }
  c.initial.kind = "alpha_minus_bump";
  c.initial.width = 0.2;
  c.initial.mass = 0.02;
  const auto bump = build_initial(c, build_spec(c));
  CHECK(1.0 - bump.mass() == doctest::Approx(0.02).epsilon(1e-10));
  c.initial.kind = "barenblatt";
  c.initial.mass = 0.01;
  c.initial.exponent = 2.0;
  CHECK(build_initial(c, build_spec(c)).mass() == doctest::Approx(0.01).epsilon(1e-4));
}

TEST_CASE("singular specs clamp initial data into the open interval") {
  auto c = parse_config(minimal);
  c.regularization.epsilon = 0.2;
  c.initial.value = 0.0;
  const auto spec = build_spec(c);
  for (double r : build_initial(c, spec).values) CHECK(r > 0.0);
}

TEST_CASE("snapshot stride 10 on 100 steps writes 11 files") {
  const auto cfg = write_config("snap.cfg", std::string(minimal) + "grid.n_cells = 16\ntime.dt = 0.01\ntime.t_end = 1\n"
                                                                   "outputs.snapshot_stride = 10\n");
  const std::vector<std::string> none;
  const auto r = run_command("run", cfg.string(), none, std::string("app_test/snap"));
  CHECK(r.exit_code == exit_pass);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator("app_test/snap/snapshots")) files += e.path().extension() == ".csv";
  CHECK(files == 11);
  CHECK(fs::exists("app_test/snap/snapshots/step_000000.csv"));
  CHECK(fs::exists("app_test/snap/snapshots/step_000100.csv"));
}

TEST_CASE("no snapshot stride means summary files only") {
  const auto cfg = write_config("plain.cfg", std::string(minimal) + "grid.n_cells = 16\ntime.t_end = 0.25\n");
  const std::vector<std::string> none;
  const auto r = run_command("run", cfg.string(), none, std::string("app_test/plain"));
  CHECK(r.exit_code == exit_pass);
  CHECK_FALSE(fs::exists("app_test/plain/snapshots"));
  CHECK(fs::exists("app_test/plain/trajectory.csv"));
  CHECK(fs::exists("app_test/plain/report.json"));
  const auto traj = slurp("app_test/plain/trajectory.csv");
  CHECK(traj.rfind("step,t,mass,energy,dissipation,newton_iters,residual,linf_change\n", 0) == 0);
}

TEST_CASE("identical runs write identical files") {
  const auto cfg = write_config("det.cfg", std::string(minimal) + "grid.n_cells = 24\ntime.t_end = 0.5\n"
                                                                  "initial.kind = gaussian\ninitial.width = 0.1\n"
                                                                  "outputs.snapshot_stride = 8\n");
  const std::vector<std::string> none;
  run_command("run", cfg.string(), none, std::string("app_test/det_a"));
  run_command("run", cfg.string(), none, std::string("app_test/det_b"));
  for (const char* f : {"trajectory.csv", "final.csv", "snapshots/step_000016.csv", "report.json"})
    CHECK_MESSAGE(slurp(fs::path("app_test/det_a") / f) == slurp(fs::path("app_test/det_b") / f), f);
}

TEST_CASE("exit status contract") {
  const std::vector<std::string> none;
  CHECK(run_command("scenario", "no_such_scenario", none, std::string("app_test/x")).exit_code == exit_config);
  CHECK(run_command("run", "app_test/missing.cfg", none, std::string("app_test/x")).exit_code == exit_config);

  const std::vector<std::string> bad{"grid.n_cells=1"};
  const auto r = run_command("scenario", "convex_potential", bad, std::string("app_test/x"));
  CHECK(r.exit_code == exit_config);
  const auto j = nlohmann::json::parse(r.json);
  CHECK(j["error"]["code"] == "ValidationError");

  const std::vector<std::string> short_run{"time.max_steps=3"};
  CHECK(run_command("scenario", "convex_potential", short_run, std::string("app_test/x")).exit_code == exit_solver);

  const std::vector<std::string> coarse_eps{"study.epsilons=0.5, 0.4, 0.3"};
  const auto fail = run_command("scenario", "epsilon_study", coarse_eps, std::string("app_test/eps"));
  CHECK(fail.exit_code == exit_assertion);
  CHECK(nlohmann::json::parse(fail.json)["status"] == "assertion_failed");
}

TEST_CASE("steady command writes the profile and sidecar") {
  const auto cfg = write_config("steady.cfg", std::string(minimal) + "problem.v_params = 10\ninitial.value = 0.3\n");
  const std::vector<std::string> none;
  const auto r = run_command("steady", cfg.string(), none, std::string("app_test/steady"));
  CHECK(r.exit_code == exit_pass);
  const auto j = nlohmann::json::parse(slurp("app_test/steady/steady.json"));
  CHECK(j["mass"].get<double>() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(fs::exists("app_test/steady/steady.csv"));
}

TEST_CASE("scenario registry") {
  const auto& names = scenario_names();
  CHECK(names.size() == 6);
  for (const auto& n : names) {
    auto c = parse_config(scenario_config(n));
    validate(c);
  }
}
