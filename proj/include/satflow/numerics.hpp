#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace satflow::numerics {

// 5-point Gauss-Legendre rule on [a, b].
double gauss_legendre5(const std::function<double(double)>& f, double a, double b);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

// Globally adaptive Gauss-Kronrod (7/15): the interval with the largest error
// estimate is bisected until the total estimate meets the tolerance or
// max_intervals is reached. Endpoints are never evaluated.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol, double rel_tol = 1e-13,
                           int max_intervals = 2000);

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> x, std::vector<double> y);

  double operator()(double t) const;
  double derivative(double t) const;
  // Integral of the interpolant from x.front() to t (exact for the cubic).
  double integral(double t) const;

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  std::span<const double> knots() const { return x_; }
  std::span<const double> values() const { return y_; }

 private:
  std::size_t segment(double t) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
  std::vector<double> cumulative_;
};

// Tridiagonal matrix, row i holds lower[i] * x[i-1] + diag[i] * x[i] +
// upper[i] * x[i+1]. lower[0] and upper[n-1] are unused.
struct Tridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  std::size_t size() const { return diag.size(); }
  double at(std::size_t i, std::size_t j) const;
  std::vector<double> multiply(std::span<const double> x) const;
};

// Thomas algorithm. Returns false on a zero pivot.
bool solve_tridiagonal(const Tridiagonal& m, std::span<const double> rhs,
                       std::vector<double>& out);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit least_squares_line(std::span<const double> x, std::span<const double> y);

// Lower median (element of rank floor((n-1)/2)); copies its input.
double median(std::span<const double> values);

// 17-significant-digit formatting, round-trip exact for doubles.
std::string format_double(double value);

}  // namespace satflow::numerics
