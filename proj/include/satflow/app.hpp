#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "satflow/error.hpp"
#include "satflow/diagnostics.hpp"
#include "satflow/grid.hpp"
#include "satflow/model.hpp"
#include "satflow/scheme.hpp"

namespace satflow::app {

struct ProblemConfig {
  double alpha = 1.0;
  std::string mobility = "logistic";
  std::vector<double> mobility_params, mobility_points, mobility_values;
  std::string u = "quadratic";
  std::vector<double> u_params, u_points, u_values;
  std::string v = "constant";
  std::vector<double> v_params;
};

struct RegularizationConfig {
  std::optional<double> epsilon, kappa, s0, band_width, quadrature_tol;
};

struct InitialConfig {
  std::string kind = "constant";  // constant|cosine|gaussian|indicator|barenblatt|alpha_minus_bump|two_bump|file
  double value = 0.5;
  double center = 0.5;
  double width = 0.1;
  double height = 0.5;
  std::optional<double> mass;
  double exponent = 2.0;
  double radius = 0.2;
  std::vector<double> masses, centers;
  std::string path;
};

struct OutputConfig {
  std::string directory = "out";
  std::size_t snapshot_stride = 0;  // 0: no snapshots
  std::vector<std::string> flags{"trajectory", "final", "report"};
  bool has(std::string_view flag) const;
};

struct AuditConfig {
  std::size_t pairs = 100;
  std::size_t steps = 20;
  std::uint64_t seed = 1;
};

struct StudyConfig {
  std::string axis = "dx_dt_joint";
  std::size_t levels = 4;
  std::size_t n_cells = 16;
  double dt = 1.0 / 16.0;
  double t_end = 0.25;
  std::vector<double> epsilons;
};

struct RunConfig {
  ProblemConfig problem;
  std::size_t n_cells = 64;
  double dt = 1.0 / 64.0;
  double t_end = 1.0;
  bool steady = false;
  SteadyDetector detector;
  SchemeConfig solver;
  RegularizationConfig regularization;
  InitialConfig initial;
  OutputConfig outputs;
  AuditConfig audit;
  StudyConfig study;
};

/// Line-oriented `section.key = value` text with `#` comments. Unknown keys
/// and malformed values throw ParseError naming the line and key.
RunConfig parse_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);
/// Applies one `section.key=value` assignment.
void apply_override(RunConfig& config, std::string_view assignment);
/// Throws ValidationError listing every violation.
void validate(const RunConfig& config);
/// All recognised keys, sorted.
std::vector<std::string> config_keys();

ProblemSpec build_base_spec(const RunConfig& config);
/// Base spec, regularized when regularization.epsilon is set.
ProblemSpec build_spec(const RunConfig& config);
/// Initial datum as a function of x (every kind except `file`).
ScalarFn initial_function(const RunConfig& config, double alpha);
DensityField build_initial(const RunConfig& config, const ProblemSpec& spec);
SchemeConfig build_solver(const RunConfig& config);

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct RunResult {
  int exit_code = 0;
  std::string summary;  // human-readable
  std::string json;     // machine-readable report
  std::vector<Check> checks;
};

// Exit codes.
inline constexpr int exit_pass = 0;
inline constexpr int exit_assertion = 2;
inline constexpr int exit_solver = 3;
inline constexpr int exit_config = 4;

int exit_code_for(ErrorCode code);

const std::vector<std::string>& scenario_names();
/// Scenario defaults as config text (overrides are applied on top).
std::string scenario_config(std::string_view name);

/// command: run|steady|audit (target = config path) or scenario (target = name).
/// Never throws; failures become exit codes with an error entry in `json`.
RunResult run_command(std::string_view command, std::string_view target, std::span<const std::string> overrides,
                      const std::optional<std::string>& out_dir);

}  // namespace satflow::app
