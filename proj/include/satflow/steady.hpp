#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "satflow/grid.hpp"
#include "satflow/model.hpp"
#include "satflow/scheme.hpp"

namespace satflow {

enum class ProfileKind { regularized, truncated, composite };
enum class VerdictKind { minimiser_compatible, multi_constant, violated };

const char* to_string(ProfileKind kind);
const char* to_string(VerdictKind kind);

struct ElVerdict {
  VerdictKind kind = VerdictKind::violated;
  std::vector<double> constants;               // one per component (one total when compatible)
  std::vector<std::size_t> violated_cells;     // only for `violated`
};

struct SteadyProfile {
  std::vector<double> constants;
  DensityField field;
  double mass = 0.0;
  ProfileKind kind = ProfileKind::truncated;
  ElVerdict verdict;

  double constant() const { return constants.front(); }
};

/// min(alpha, max(0, s)).
double truncate(double s, double alpha);

/// P(C) = dx sum T o (U')^{-1}(C - V(x_i)).
double mass_map(double c, const ProblemSpec& spec, const Grid1D& grid);
std::vector<double> profile_for_constant(double c, const ProblemSpec& spec, const Grid1D& grid);

/// Solves P(C) = mass. The profile is regularized when the spec carries an
/// epsilon, truncated otherwise.
SteadyProfile solve_mass_constant(double mass, const ProblemSpec& spec, const Grid1D& grid);
/// Same, regularizing `base` with default parameters first when epsilon > 0.
SteadyProfile solve_mass_constant(double mass, const ProblemSpec& base, const Grid1D& grid, double epsilon);

/// Discrete Barenblatt profile ((m-1)/m (C - |x_i - x_c|^2/2))_+^{1/(m-1)},
/// capped at alpha, with C fixed by the discrete mass.
SteadyProfile barenblatt(double mass, double m, double center, const Grid1D& grid,
                         double alpha = std::numeric_limits<double>::infinity());
/// Sum of single-bump profiles with disjoint supports.
SteadyProfile composite_barenblatt(std::span<const double> masses, std::span<const double> centers, double m,
                                   const Grid1D& grid, double alpha = std::numeric_limits<double>::infinity());

ElVerdict check_euler_lagrange(std::span<const double> rho, const Grid1D& grid, const ProblemSpec& spec,
                               double tol = 1e-8);

struct FixedPointCheck {
  bool ok = false;
  double change = 0.0;    // sum |rho' - rho| after one implicit step
  double threshold = 0.0; // 10 * newton_tol
};

FixedPointCheck verify_fixed_point(const DensityField& rho, const SchemeConfig& config, const ProblemSpec& spec);

std::string steady_json(const SteadyProfile& profile);
/// Writes `<prefix>.csv` and `<prefix>.json`.
void write_steady(const std::string& prefix, const SteadyProfile& profile);

}  // namespace satflow
