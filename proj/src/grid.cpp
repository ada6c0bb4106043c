#include "satflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "satflow/error.hpp"
#include "satflow/numerics.hpp"

namespace satflow {

Grid1D::Grid1D(std::size_t n) : n_cells(n), dx(1.0 / static_cast<double>(n)) {
  if (n < 2) fail(ErrorCode::invalid_argument, "grid needs at least 2 cells");
}

std::vector<double> Grid1D::centers() const {
  std::vector<double> x(n_cells);
  for (std::size_t i = 0; i < n_cells; ++i) x[i] = center(i);
  return x;
}

DensityField::DensityField(Grid1D g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.n_cells) fail(ErrorCode::invalid_argument, "density size differs from grid size");
}

double DensityField::mass() const {
  double sum = 0.0;
  for (double r : values) sum += r;
  return grid.dx * sum;
}

DensityField project_initial(const ScalarFn& rho0, const Grid1D& grid, double alpha) {
  static constexpr double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                      0.9061798459386640};
  static constexpr double weights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                        0.4786286704993665, 0.2369268850561891};
  std::vector<double> values(grid.n_cells);
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    const double c = grid.center(i);
    double acc = 0.0;
    for (int q = 0; q < 5; ++q) {
      const double x = c + 0.5 * grid.dx * nodes[q];
      const double r = rho0(x);
      if (!(r >= -1e-9 && r <= alpha + 1e-9)) {
        std::ostringstream msg;
        msg << "initial datum " << r << " at x = " << x << " lies outside [0, " << alpha << "]";
        fail(ErrorCode::out_of_range, msg.str());
      }
      acc += weights[q] * r;
    }
    values[i] = std::clamp(0.5 * acc, 0.0, alpha);
  }
  return DensityField(grid, std::move(values));
}

double l1_norm(std::span<const double> a, double dx, NormScaling scaling) {
  double sum = 0.0;
  for (double v : a) sum += std::abs(v);
  return scaling == NormScaling::weighted ? dx * sum : sum;
}

double w_minus_1_1_norm(std::span<const double> u, double dx) {
  std::vector<double> c(u.size() + 1, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) c[i + 1] = c[i] + dx * u[i];
  const double med = numerics::median(c);
  double sum = 0.0;
  for (double v : c) sum += std::abs(v - med);
  return dx * sum;
}

std::optional<double> try_discrete_energy(std::span<const double> rho, const Grid1D& grid,
                                          const ProblemSpec& spec) {
  if (rho.size() != grid.n_cells) fail(ErrorCode::invalid_argument, "energy: density size differs from grid size");
  double sum = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double u = spec.potential.u(rho[i]);
    if (!std::isfinite(u)) return std::nullopt;
    sum += u + spec.external.v(grid.center(i)) * rho[i];
  }
  return grid.dx * sum;
}

double discrete_energy(std::span<const double> rho, const Grid1D& grid, const ProblemSpec& spec) {
  auto e = try_discrete_energy(rho, grid, spec);
  if (!e) fail(ErrorCode::energy_infinite, "energy is infinite: a cell sits at a singular endpoint of U");
  return *e;
}

void write_csv(std::ostream& out, const DensityField& field) {
  out << "x,rho\n";
  for (std::size_t i = 0; i < field.size(); ++i)
    out << numerics::format_double(field.grid.center(i)) << ',' << numerics::format_double(field.values[i]) << '\n';
}

void write_csv(const std::string& path, const DensityField& field) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  write_csv(out, field);
  if (!out) fail(ErrorCode::io_error, "write to '" + path + "' failed");
}

DensityField read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open '" + path + "'");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorCode::parse_error, path + ":" + std::to_string(line_no) + ": expected x,rho");
    try {
      std::size_t used = 0;
      const std::string field = line.substr(comma + 1);
      const double v = std::stod(field, &used);
      values.push_back(v);
    } catch (const std::exception&) {
      if (values.empty() && line_no == 1) continue;  // header
      fail(ErrorCode::parse_error, path + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  if (values.size() < 2) fail(ErrorCode::parse_error, path + ": need at least 2 rows");
  const Grid1D grid(values.size());
  return DensityField(grid, std::move(values));
}

}  // namespace satflow
