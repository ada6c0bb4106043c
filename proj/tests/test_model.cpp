#include <cmath>
#include <vector>

#include <doctest.h>

#include "satflow/model.hpp"
#include "support.hpp"

using namespace satflow;

TEST_CASE("log-split decomposition of s(1-s) matches the closed form") {
  const auto pair = decompose_mobility([](double s) { return s * (1.0 - s); }, 1.0);
  for (int k = 0; k <= 200; ++k) {
    const double s = k / 200.0;
    const double m1 = s <= 0.5 ? s * (1.0 - s) : 0.25;
    const double m2 = s <= 0.5 ? 1.0 : 4.0 * s * (1.0 - s);
    CHECK(std::abs(pair.m1(s) - m1) < 1e-10);
    CHECK(std::abs(pair.m2(s) - m2) < 1e-10);
    CHECK(std::abs(pair(s) - s * (1.0 - s)) < 1e-12);
  }
  pair.validate();
}

TEST_CASE("hand-supplied and decomposed pairs both reproduce s(1-s)") {
  const auto exact = logistic_mobility(1.0);
  const auto split = decompose_mobility([](double s) { return s * (1.0 - s); }, 1.0);
  for (int k = 0; k <= 50; ++k) {
    const double s = k / 50.0;
    CHECK(exact.m1(s) == s);
    CHECK(exact.m2(s) == 1.0 - s);
    CHECK(std::abs(exact(s) - split(s)) < 1e-12);
  }
}

TEST_CASE("non-concave s^2(1-s^2) decomposes into a valid pair") {
  auto m = [](double s) { return s * s * (1.0 - s * s); };
  const auto pair = decompose_mobility(m, 1.0);
  pair.validate();
  double worst = 0.0, prev1 = -1.0, prev2 = 2.0;
  for (int k = 0; k <= 100000; ++k) {
    const double s = k / 100000.0;
    worst = std::max(worst, std::abs(pair(s) - m(s)));
    const double a = pair.m1(s), b = pair.m2(s);
    CHECK_MESSAGE(a >= prev1 - 1e-12, "m1 decreases at ", s);
    CHECK_MESSAGE(b <= prev2 + 1e-12, "m2 increases at ", s);
    prev1 = a;
    prev2 = b;
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("decomposition rejects an interior zero") {
  CHECK(test::code_of([] {
          decompose_mobility([](double s) { return s * (1.0 - s) * std::max(0.0, std::abs(s - 0.3) - 0.01); }, 1.0);
        }) == ErrorCode::non_positive_interior);
}

TEST_CASE("built-in families") {
  const auto q = quadratic_potential(1.0);
  CHECK(q.u(0.3) == doctest::Approx(0.09));
  CHECK(q.du(0.3) == doctest::Approx(0.6));
  CHECK(q.ddu(0.3) == 2.0);
  const auto pm = porous_medium_potential(2.0, 1.0);
  for (double s : {0.0, 0.2, 0.7, 1.0}) CHECK(pm.u(s) == doctest::Approx(s * s).epsilon(1e-15));
  const auto h = harmonic_potential(10.0);
  CHECK(h.v(0.5) == doctest::Approx(2.5));
  CHECK(h.dv(0.5) == doctest::Approx(10.0));
  CHECK(h.grad_bound >= 20.0);
  const auto b = boltzmann_potential(1.0);
  CHECK(b.kind == DomainKind::singular);
  CHECK(std::isinf(b.zeta_lo));

  const std::vector<double> none;
  CHECK(test::code_of([&] { make_mobility("nope", none, 1.0); }) == ErrorCode::unknown_family);
  CHECK(test::code_of([&] { make_diffusion("nope", none, 1.0); }) == ErrorCode::unknown_family);
  CHECK(test::code_of([&] { make_external("nope", none); }) == ErrorCode::unknown_family);
  const std::vector<double> bad_m{-1.0};
  CHECK(test::code_of([&] { make_diffusion("porous_medium", bad_m, 1.0); }) == ErrorCode::bad_parameter);
}

TEST_CASE("double-well mobility and potential satisfy their invariants") {
  const auto m = double_well_mobility(1.0);
  m.validate();
  CHECK(m(0.0) == 0.0);
  CHECK(m(1.0) == 0.0);
  const auto v = double_well_potential(0.25, 0.75, 0.2);
  v.validate();
  CHECK(v.v(0.25) == doctest::Approx(0.0));
  CHECK(v.v(0.75) == doctest::Approx(0.0));
  CHECK(v.v(0.3) == doctest::Approx(0.00125));
  // Blend is continuous through the middle.
  for (double x = 0.44; x < 0.56; x += 1e-4) CHECK(std::abs(v.v(x + 1e-7) - v.v(x)) < 1e-6);
}

TEST_CASE("regularized second derivative at the anchor") {
  const auto base = test::logistic_quadratic(10.0);
  RegularizationParams p = RegularizationParams::with_defaults(0.1, 1.0);
  CHECK(p.kappa == 0.1);
  CHECK(p.s0 == 0.5);
  const auto reg = regularize(base, p);
  const double m_eps = reg.mobility(0.5);
  CHECK(reg.potential.ddu(0.5) == doctest::Approx((0.5 + 0.1) / m_eps).epsilon(1e-9));
  CHECK(reg.potential.du(0.5) == 1.0);
  CHECK(reg.potential.u(0.5) == 0.25);
  CHECK(reg.singular());
  CHECK(reg.epsilon() == 0.1);
}

TEST_CASE("regularized potentials converge to U' on compacts") {
  const auto base = test::logistic_quadratic();
  double prev = INFINITY;
  for (double eps : {0.1, 0.05, 0.025}) {
    const auto reg = regularize(base, RegularizationParams::with_defaults(eps, 1.0));
    CHECK(reg.potential.du(0.5) == 1.0);
    double worst = 0.0;
    for (int k = 0; k <= 500; ++k) {
      const double s = 0.25 + 0.5 * k / 500.0;
      worst = std::max(worst, std::abs(reg.potential.du(s) - 2.0 * s));
    }
    CHECK(worst < prev);
    prev = worst;
  }
}

TEST_CASE("regularized problem is uniformly elliptic and invertible") {
  const auto base = test::logistic_quadratic();
  const double eps = 0.05;
  const auto reg = regularize(base, RegularizationParams::with_defaults(eps, 1.0));
  double prev = -INFINITY;
  for (int k = 1; k < 4000; ++k) {
    const double s = k / 4000.0;
    const double phi = regularized_phi_prime(reg, s);
    CHECK(phi >= eps - 1e-15);
    CHECK(phi <= 1.0 / eps + eps + 1e-12);
    const double du = reg.potential.du(s);
    CHECK(du > prev);
    prev = du;
    CHECK(std::abs(reg.potential.du_inverse(du) - s) < 1e-9);
  }
  CHECK(std::isinf(reg.potential.zeta_lo));
  CHECK(std::isinf(reg.potential.zeta_hi));
  // Endpoint slopes of m_eps are at least 1 + eps.
  const double h = 1e-9;
  CHECK((reg.mobility(h) - reg.mobility(0.0)) / h >= 1.0 + eps - 1e-6);
  CHECK((reg.mobility(1.0 - h) - reg.mobility(1.0)) / h >= 1.0 + eps - 1e-6);
  reg.mobility.validate();
}

TEST_CASE("regularization needs a strictly convex anchor") {
  ProblemSpec spec = test::logistic_quadratic();
  spec.potential = tabulated_potential({0.0, 0.4, 0.6, 1.0}, {-1.0, 0.0, 0.0, 1.0});
  CHECK(test::code_of([&] { regularize(spec, RegularizationParams::with_defaults(0.1, 1.0)); }) ==
        ErrorCode::anchor_invalid);
}
