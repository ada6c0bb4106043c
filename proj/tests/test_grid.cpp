#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "satflow/grid.hpp"
#include "support.hpp"

using namespace satflow;

namespace {

// Exact minimum of t -> dx sum |t + c_i| by evaluating every breakpoint.
double w11_scan(const std::vector<double>& u, double dx) {
  std::vector<double> c{0.0};
  for (double x : u) c.push_back(c.back() + dx * x);
  double best = INFINITY;
  for (double t0 : c) {
    double s = 0.0;
    for (double ci : c) s += std::abs(-t0 + ci);
    best = std::min(best, dx * s);
  }
  return best;
}

}  // namespace

TEST_CASE("grid centers and spacing") {
  const Grid1D g(8);
  CHECK(g.dx * 8 == doctest::Approx(1.0).epsilon(1e-16));
  CHECK(g.center(0) == 0.0625);
  CHECK(g.center(7) == 0.9375);
  CHECK(test::code_of([] { Grid1D bad(1); }) == ErrorCode::invalid_argument);
}

TEST_CASE("projection of x on four cells is the cell midpoints") {
  const auto f = project_initial([](double x) { return x; }, Grid1D(4), 1.0);
  const double want[] = {0.125, 0.375, 0.625, 0.875};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(f.values[i] - want[i]) < 1e-15);
}

TEST_CASE("projection of a constant is exact") {
  const auto f = project_initial([](double) { return 0.37; }, Grid1D(13), 1.0);
  for (double v : f.values) CHECK(v == 0.37);
}

TEST_CASE("projection rejects data outside [0, alpha]") {
  CHECK(test::code_of([] { project_initial([](double) { return 1.5; }, Grid1D(4), 1.0); }) ==
        ErrorCode::out_of_range);
  // Tiny overshoot is absorbed by clamping.
  const auto f = project_initial([](double) { return 1.0 + 1e-12; }, Grid1D(4), 1.0);
  for (double v : f.values) CHECK(v == 1.0);
}

TEST_CASE("projected Barenblatt bump keeps the continuous mass") {
  const double c = 0.02, r = std::sqrt(2.0 * c);
  const double exact = 0.5 * (2.0 * c * r - r * r * r / 3.0);
  const auto f = project_initial(
      [&](double x) {
        const double d = x - 0.5;
        return std::max(0.0, 0.5 * (c - 0.5 * d * d));
      },
      Grid1D(64), 1.0);
  CHECK(std::abs(f.mass() - exact) < 1e-6);
}

TEST_CASE("l1 norm examples") {
  const std::vector<double> zero(5, 0.0), pm{1.0, -1.0};
  CHECK(l1_norm(zero, 0.2) == 0.0);
  CHECK(l1_norm(pm, 0.5) == 1.0);
  CHECK(l1_norm(pm, 0.5, NormScaling::paper_raw) == 2.0);
}

TEST_CASE("W^{-1,1} norm examples") {
  CHECK(w_minus_1_1_norm(std::vector<double>(4, 0.0), 0.25) == 0.0);
  CHECK(w_minus_1_1_norm(std::vector<double>{1.0, -1.0}, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(w_minus_1_1_norm(std::vector<double>{2.0, -1.0, -1.0}, 1.0 / 3.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(w11_scan({2.0, -1.0, -1.0}, 1.0 / 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("W^{-1,1} norm matches the breakpoint scan and is a norm") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> sizes(1, 40);
  for (int k = 0; k < 300; ++k) {
    const std::size_t n = static_cast<std::size_t>(sizes(rng));
    const double dx = 1.0 / static_cast<double>(n);
    const auto u = test::uniform(n, -2.0, 2.0, rng), w = test::uniform(n, -2.0, 2.0, rng);
    const double nu = w_minus_1_1_norm(u, dx);
    CHECK(std::abs(nu - w11_scan(u, dx)) < 1e-12);
    CHECK(nu > 0.0);
    std::vector<double> scaled(u), sum(u);
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] *= -3.5;
      sum[i] += w[i];
    }
    CHECK(w_minus_1_1_norm(scaled, dx) == doctest::Approx(3.5 * nu).epsilon(1e-12));
    CHECK(w_minus_1_1_norm(sum, dx) <= nu + w_minus_1_1_norm(w, dx) + 1e-12);
    CHECK(nu <= static_cast<double>(n + 1) * dx * l1_norm(u, dx) + 1e-12);
  }
}

TEST_CASE("discrete energy examples") {
  ProblemSpec spec = test::logistic_quadratic();
  spec.external = harmonic_potential(4.0, 0.25);  // V(0.25) = 0, V(0.75) = 1
  const Grid1D g(2);
  CHECK(discrete_energy(std::vector<double>{0.2, 0.6}, g, spec) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(discrete_energy(std::vector<double>{0.0, 0.0}, g, spec) == 0.0);
  const auto flat = test::logistic_quadratic();
  CHECK(discrete_energy(std::vector<double>(10, 0.3), Grid1D(10), flat) == doctest::Approx(0.09).epsilon(1e-14));
}

TEST_CASE("discrete energy signals a cell at a singular endpoint") {
  ProblemSpec spec = test::logistic_quadratic();
  spec.potential.u = [](double s) { return s > 0.0 ? -std::log(s) : INFINITY; };
  const Grid1D g(2);
  CHECK(test::code_of([&] { discrete_energy(std::vector<double>{0.0, 0.5}, g, spec); }) ==
        ErrorCode::energy_infinite);
  CHECK_FALSE(try_discrete_energy(std::vector<double>{0.0, 0.5}, g, spec).has_value());
  CHECK(try_discrete_energy(std::vector<double>{0.25, 0.5}, g, spec).has_value());
}

TEST_CASE("bounded entropy extends continuously to the endpoint") {
  ProblemSpec spec = test::logistic_quadratic();
  spec.potential = boltzmann_potential(1.0);
  const auto e = try_discrete_energy(std::vector<double>{0.0, 0.5}, Grid1D(2), spec);
  REQUIRE(e.has_value());
  CHECK(*e == doctest::Approx(0.25 * std::log(0.5)));
}

TEST_CASE("energy is bounded below on admissible states") {
  const auto spec = test::logistic_quadratic(10.0);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto rho = test::uniform(16, 0.0, 1.0, rng);
    CHECK(discrete_energy(rho, Grid1D(16), spec) >= 0.0);
  }
}

TEST_CASE("density CSV round trip is exact") {
  std::mt19937_64 rng(11);
  const DensityField f(Grid1D(9), test::uniform(9, 0.0, 1.0, rng));
  const std::string path = "grid_roundtrip.csv";
  write_csv(path, f);
  const auto back = read_csv(path);
  CHECK(back.grid == f.grid);
  CHECK(back.values == f.values);
  std::ostringstream s;
  write_csv(s, f);
  CHECK(s.str().rfind("x,rho\n", 0) == 0);
}
