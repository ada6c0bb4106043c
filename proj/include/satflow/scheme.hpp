#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "satflow/grid.hpp"
#include "satflow/model.hpp"
#include "satflow/numerics.hpp"

namespace satflow {

enum class SignAtZero { positive, negative };

struct SchemeConfig {
  double dt = 1.0 / 64.0;
  std::optional<double> newton_tol;  // default 1e-12 * N, absolute on sum |G_i|
  int newton_max_iter = 50;
  double damping_min = 1.0 / 1048576.0;
  std::vector<double> homotopy_stages{0.25, 0.5, 0.75, 1.0};
  std::optional<double> clamp_margin;  // default 1e-14 * alpha
  SignAtZero sign_at_zero = SignAtZero::positive;
  int max_halvings = 10;

  double tolerance(std::size_t n_cells) const { return newton_tol.value_or(1e-12 * static_cast<double>(n_cells)); }
  double margin(double alpha) const { return clamp_margin.value_or(1e-14 * alpha); }
  void validate() const;
};

struct StepReport {
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> fluxes;      // F_{i+1/2}, i = 0..N
  std::vector<double> velocities;  // interior interfaces, N-1 values
  double energy_before = 0.0;      // NaN when infinite
  double energy_after = 0.0;
  double dissipation = 0.0;
  double linf_change = 0.0;
  bool used_homotopy = false;
  int halvings = 0;     // deepest dt-halving level used inside this nominal step
  int substeps = 1;
  double max_energy_excess = 0.0;  // max over solver sub-steps of E_after - E_before + dissipation
};

/// xi_i = U'(rho_i) + V(x_i); throws SingularEvaluation where U' is infinite.
std::vector<double> chemical_potential(std::span<const double> rho, const Grid1D& grid, const ProblemSpec& spec);
std::vector<double> velocity(std::span<const double> rho, const Grid1D& grid, const ProblemSpec& spec);
std::vector<double> flux(std::span<const double> rho, const Grid1D& grid, const ProblemSpec& spec);

/// G_i = rho_i + lambda dt/dx (F_{i+1/2} - F_{i-1/2}) - rho_prev_i.
std::vector<double> apply_H(std::span<const double> rho, std::span<const double> rho_prev, double lambda,
                            double dt, const Grid1D& grid, const ProblemSpec& spec);

numerics::Tridiagonal jacobian(std::span<const double> rho, double lambda, double dt, const Grid1D& grid,
                               const ProblemSpec& spec, SignAtZero sign = SignAtZero::positive);

/// One implicit step. Throws NewtonDiverged when direct Newton and the
/// homotopy fallback both fail, BoundViolation if the result leaves [0, alpha].
std::pair<DensityField, StepReport> implicit_step(const DensityField& rho_prev, const SchemeConfig& config,
                                                  const ProblemSpec& spec);

/// Newton solve of H(lambda, rho) = rho_prev from an initial guess; no fallback.
std::optional<std::pair<DensityField, int>> newton_solve(const DensityField& rho_prev, const DensityField& guess,
                                                         double lambda, const SchemeConfig& config,
                                                         const ProblemSpec& spec);

/// Constants c_lo <= c <= c_hi with H(c_lo) <= c <= H(c_hi) for every lambda.
std::pair<double, double> constant_bracket(double c, double dt, const Grid1D& grid, const ProblemSpec& spec);

struct TrajectoryRow {
  std::size_t step = 0;
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  int newton_iters = 0;
  double residual = 0.0;
  double linf_change = 0.0;
};

struct StepEvent {
  std::size_t step;
  double t;
  const DensityField& state;
  const StepReport& report;
};

/// Return false to stop the run after this step.
using StepObserver = std::function<bool(const StepEvent&)>;

struct Trajectory {
  DensityField initial;
  DensityField final_state;
  std::vector<TrajectoryRow> rows;  // row 0 is the initial state
  std::size_t steps = 0;
  double t = 0.0;
  bool stopped_early = false;
  int halving_events = 0;
  double max_energy_excess = 0.0;
};

std::size_t nominal_steps(double t_end, double dt);

/// ceil(t_end / dt) nominal steps; a failed step is retried with dt halved up
/// to config.max_halvings times (StepFailed beyond that).
Trajectory evolve(const DensityField& rho0, double t_end, const SchemeConfig& config, const ProblemSpec& spec,
                  const StepObserver& observer = {});

}  // namespace satflow
