#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "satflow/model.hpp"

namespace satflow {

/// Uniform grid on (0, 1) with N cells; centers x_i = (i + 1/2) dx for i = 0..N-1.
struct Grid1D {
  std::size_t n_cells = 2;
  double dx = 0.5;

  Grid1D() = default;
  explicit Grid1D(std::size_t n);

  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx; }
  std::vector<double> centers() const;
  bool operator==(const Grid1D&) const = default;
};

struct DensityField {
  Grid1D grid;
  std::vector<double> values;

  DensityField() = default;
  DensityField(Grid1D g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double mass() const;
};

/// Cell averages of rho0 by 5-point Gauss-Legendre, clamped to [0, alpha].
DensityField project_initial(const ScalarFn& rho0, const Grid1D& grid, double alpha);

enum class NormScaling { weighted, paper_raw };

double l1_norm(std::span<const double> a, double dx, NormScaling scaling = NormScaling::weighted);

/// min_t dx * sum_{i=0}^{N} |t + c_i|, c_0 = 0, c_i = dx * sum_{j<=i} u_j.
double w_minus_1_1_norm(std::span<const double> u, double dx);

/// dx * sum (U(rho_i) + V(x_i) rho_i); throws EnergyInfinite at a singular endpoint.
double discrete_energy(std::span<const double> rho, const Grid1D& grid, const ProblemSpec& spec);
std::optional<double> try_discrete_energy(std::span<const double> rho, const Grid1D& grid,
                                          const ProblemSpec& spec);

void write_csv(std::ostream& out, const DensityField& field);
void write_csv(const std::string& path, const DensityField& field);
/// Reads `x,rho` rows (an optional header line is skipped); N is the row count.
DensityField read_csv(const std::string& path);

}  // namespace satflow
