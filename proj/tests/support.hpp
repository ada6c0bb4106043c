#pragma once

#include <functional>
#include <random>
#include <vector>

#include "satflow/error.hpp"
#include "satflow/model.hpp"

namespace test {

inline satflow::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const satflow::Error& e) {
    return e.code();
  }
  return satflow::ErrorCode::ok;
}

// m = s(1-s), U = s^2, V = k x^2.
inline satflow::ProblemSpec logistic_quadratic(double k = 0.0) {
  satflow::ProblemSpec spec;
  spec.alpha = 1.0;
  spec.mobility = satflow::logistic_mobility(1.0);
  spec.potential = satflow::quadratic_potential(1.0);
  spec.external = k == 0.0 ? satflow::constant_potential(0.0) : satflow::harmonic_potential(k);
  return spec;
}

inline std::vector<double> uniform(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace test
