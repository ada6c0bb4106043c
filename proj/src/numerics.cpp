#include "satflow/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <cstdio>
#include <stdexcept>

namespace satflow::numerics {

namespace {

constexpr double kGl5Nodes[5] = {-0.9061798459386639927976269, -0.5384693101056830910363144, 0.0,
                                 0.5384693101056830910363144, 0.9061798459386639927976269};
constexpr double kGl5Weights[5] = {0.2369268850561890875142640, 0.4786286704993664680412915,
                                   0.5688888888888888888888889, 0.4786286704993664680412915,
                                   0.2369268850561890875142640};

// Kronrod abscissae on [0, 1]; odd indices are shared with the 7-point Gauss rule.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Gk15 {
  double kronrod;
  double gauss;
};

Gk15 gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  return {resk * half, resg * half};
}

}  // namespace

double gauss_legendre5(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int k = 0; k < 5; ++k) sum += kGl5Weights[k] * f(center + half * kGl5Nodes[k]);
  return sum * half;
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, double rel_tol, int max_intervals) {
  QuadratureResult out;
  if (a == b) return out;
  struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
  };
  auto make = [&](double lo, double hi) {
    const Gk15 r = gk15(f, lo, hi);
    return Interval{lo, hi, r.kronrod, std::abs(r.kronrod - r.gauss)};
  };
  std::priority_queue<Interval> heap;
  heap.push(make(a, b));
  double value = heap.top().value, error = heap.top().error;
  int count = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) && std::isfinite(value)) {
    const Interval worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (count >= max_intervals || mid == worst.a || mid == worst.b) break;
    heap.pop();
    const Interval left = make(worst.a, mid), right = make(mid, worst.b);
    heap.push(left);
    heap.push(right);
    ++count;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
  }
  if (count > 1) {
    value = 0.0;
    error = 0.0;
    for (; !heap.empty(); heap.pop()) {
      value += heap.top().value;
      error += heap.top().error;
    }
  }
  out.value = value;
  out.error = error;
  out.converged = std::isfinite(value) && error <= std::max(abs_tol, rel_tol * std::abs(value));
  return out;
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("Pchip needs >= 2 matching points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("Pchip knots must be strictly increasing");

  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        d_[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    // Shape-preserving three-point end slopes.
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (d * d0 <= 0.0) return 0.0;
      if (d0 * d1 <= 0.0 && std::abs(d) > std::abs(3.0 * d0)) return 3.0 * d0;
      return d;
    };
    d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }
  cumulative_.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    cumulative_[i + 1] = cumulative_[i] + h[i] * (y_[i] + y_[i + 1]) / 2.0 +
                         h[i] * h[i] * (d_[i] - d_[i + 1]) / 12.0;
  }
}

std::size_t Pchip::segment(double t) const {
  if (t <= x_.front()) return 0;
  if (t >= x_.back()) return x_.size() - 2;
  const auto it = std::upper_bound(x_.begin(), x_.end(), t);
  return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double Pchip::operator()(double t) const {
  t = std::clamp(t, x_.front(), x_.back());
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double s = (t - x_[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double Pchip::derivative(double t) const {
  if (t < x_.front() || t > x_.back()) return 0.0;
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double s = (t - x_[i]) / h;
  const double dh00 = 6 * s * s - 6 * s;
  const double dh10 = 3 * s * s - 4 * s + 1;
  const double dh01 = -6 * s * s + 6 * s;
  const double dh11 = 3 * s * s - 2 * s;
  return (dh00 * y_[i] + dh01 * y_[i + 1]) / h + dh10 * d_[i] + dh11 * d_[i + 1];
}

double Pchip::integral(double t) const {
  t = std::clamp(t, x_.front(), x_.back());
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double s = (t - x_[i]) / h;
  // Antiderivatives of the Hermite basis on [0, s].
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
  const double i00 = s - s3 + s4 / 2;
  const double i10 = s2 / 2 - 2 * s3 / 3 + s4 / 4;
  const double i01 = s3 - s4 / 2;
  const double i11 = s4 / 4 - s3 / 3;
  return cumulative_[i] +
         h * (i00 * y_[i] + i10 * h * d_[i] + i01 * y_[i + 1] + i11 * h * d_[i + 1]);
}

double Tridiagonal::at(std::size_t i, std::size_t j) const {
  if (i == j) return diag[i];
  if (j + 1 == i) return lower[i];
  if (i + 1 == j) return upper[i];
  return 0.0;
}

std::vector<double> Tridiagonal::multiply(std::span<const double> x) const {
  const std::size_t n = size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag[i] * x[i];
    if (i > 0) acc += lower[i] * x[i - 1];
    if (i + 1 < n) acc += upper[i] * x[i + 1];
    y[i] = acc;
  }
  return y;
}

bool solve_tridiagonal(const Tridiagonal& m, std::span<const double> rhs, std::vector<double>& out) {
  const std::size_t n = m.size();
  out.assign(n, 0.0);
  if (n == 0) return true;
  std::vector<double> c(n, 0.0), d(n, 0.0);
  double pivot = m.diag[0];
  if (pivot == 0.0 || !std::isfinite(pivot)) return false;
  c[0] = n > 1 ? m.upper[0] / pivot : 0.0;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = m.diag[i] - m.lower[i] * c[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) return false;
    c[i] = i + 1 < n ? m.upper[i] / pivot : 0.0;
    d[i] = (rhs[i] - m.lower[i] * d[i - 1]) / pivot;
  }
  out[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) out[i] = d[i] - c[i] * out[i + 1];
  return true;
}

LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("line fit needs >= 2 matching points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

double median(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty range");
  std::vector<double> v(values.begin(), values.end());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace satflow::numerics
