#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "satflow/grid.hpp"
#include "satflow/model.hpp"
#include "satflow/scheme.hpp"
#include "satflow/steady.hpp"

namespace satflow {

// --- order fits ------------------------------------------------------------------

struct OrderFit {
  std::string axis;
  std::vector<double> resolutions;  // strictly decreasing
  std::vector<double> errors;
  double fitted_order = 0.0;
  double r_squared = 0.0;
  bool valid = false;  // false when every error sits below the noise floor
};

/// Least-squares slope of log(error) against log(resolution). Throws
/// RefinementMismatch for fewer than 3 levels, non-decreasing resolutions or
/// a zero error.
OrderFit fit_order(std::span<const double> resolutions, std::span<const double> errors);

enum class RefinementAxis { dx_dt_joint, dt_only, dx_only, epsilon };
const char* to_string(RefinementAxis axis);
std::optional<RefinementAxis> parse_axis(std::string_view name);

struct OrderStudy {
  RefinementAxis axis = RefinementAxis::dx_dt_joint;
  ProblemSpec spec;  // unregularized base problem
  ScalarFn initial;
  double t_end = 0.25;
  std::size_t n_cells = 16;  // coarsest N (fixed N on the dt_only and epsilon axes)
  double dt = 1.0 / 16.0;    // coarsest dt (fixed dt on the dx_only and epsilon axes)
  std::size_t levels = 4;
  std::vector<double> epsilons;  // epsilon axis, decreasing
  SchemeConfig solver;           // dt is overwritten per level
  double noise_floor = 0.0;      // 0: 10 * newton_tol * dx of the level
};

/// Self-convergence study. Errors are sup over the coarsest time grid of
/// dx * sum |rho - R rho_ref|, where R aggregates reference cells onto the
/// level grid. The reference runs 4x finer than the finest level on the
/// refined axes; on the epsilon axis it is the unregularized run.
OrderFit estimate_order(const OrderStudy& study);

/// Averages groups of fine cells onto a coarser grid.
std::vector<double> restrict_to(std::span<const double> fine, std::size_t n_coarse);

// --- steady detection -------------------------------------------------------------

enum class SteadyCriterion { step_change, energy_plateau, w11_step };
const char* to_string(SteadyCriterion c);
std::optional<SteadyCriterion> parse_criterion(std::string_view name);

struct SteadyDetector {
  SteadyCriterion criterion = SteadyCriterion::step_change;
  double tol_rate = 1e-10;
  double tol_energy = 1e-14;
  int patience = 5;
  std::size_t max_steps = 100000;

  void validate() const;
};

struct SteadyRun {
  Trajectory trajectory;
  bool detected = false;
  FixedPointCheck fixed_point;
};

/// Evolves until the detector has fired `patience` consecutive times and the
/// state passes verify_fixed_point. Throws NoConvergence after max_steps.
SteadyRun run_to_steady(const DensityField& rho0, const SchemeConfig& config, const ProblemSpec& spec,
                        const SteadyDetector& detector, const StepObserver& observer = {});

// --- audits -------------------------------------------------------------------------

struct ContractionPair {
  std::size_t index = 0;
  double initial_l1 = 0.0;
  double l1_excess = 0.0;         // max_n sum|rho^n - eta^n| - sum|rho^0 - eta^0|
  double positive_excess = 0.0;   // same for the positive part
  double order_violation = 0.0;   // max_n max_i (min-run - max-run)_+
};

struct ContractionReport {
  std::size_t pairs = 0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  double slack = 1e-8;
  double max_l1_excess = 0.0;
  double max_positive_excess = 0.0;
  double max_order_violation = 0.0;
  std::size_t violations = 0;
  bool passed = false;
  std::vector<ContractionPair> entries;
};

/// Uniform values in [0.05 alpha, 0.95 alpha] followed by one (1,2,1)/4
/// averaging pass.
std::vector<double> random_density(std::size_t n, double alpha, std::mt19937_64& rng);

ContractionReport contraction_audit(std::size_t pairs, std::size_t steps, const SchemeConfig& config,
                                    const ProblemSpec& spec, const Grid1D& grid, std::uint64_t seed,
                                    double slack = 1e-8);

struct EnergyWindow {
  std::size_t k = 0;  // window length in steps
  double max_excess = 0.0;  // max over windows of sum dissipation - (E_n - E_{n+k})
};

struct EnergyReport {
  std::size_t steps = 0;
  double max_increase = 0.0;  // max_n E_{n+1} - E_n - 1e-9 (1 + |E_n|), clipped below at 0
  std::vector<EnergyWindow> windows;
  double substep_excess = 0.0;  // max over solver sub-steps of E_after - E_before + dissipation
  double slack = 1e-8;
  bool passed = false;
};

EnergyReport energy_audit(const Trajectory& trajectory);

// --- emission -----------------------------------------------------------------------

std::string to_json(const OrderFit& fit);
std::string to_json(const ContractionReport& report);
std::string to_json(const EnergyReport& report);
std::string to_text(const OrderFit& fit);
std::string to_text(const ContractionReport& report);
std::string to_text(const EnergyReport& report);
void write_order_csv(const std::string& path, const OrderFit& fit);

}  // namespace satflow
