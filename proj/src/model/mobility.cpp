#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "satflow/error.hpp"
#include "satflow/model.hpp"
#include "satflow/numerics.hpp"

namespace satflow {

void MobilityPair::validate(std::size_t samples) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorCode::bad_parameter, "mobility: alpha must be positive");
  if (!m1 || !m2 || !dm1 || !dm2) fail(ErrorCode::bad_parameter, "mobility: missing factor or derivative");
  const double at0 = m1(0.0) * m2(0.0);
  const double at_alpha = m1(alpha) * m2(alpha);
  if (at0 != 0.0 || at_alpha != 0.0) {
    std::ostringstream msg;
    msg << "mobility must vanish at 0 and alpha (got " << at0 << ", " << at_alpha << ")";
    fail(ErrorCode::bad_parameter, msg.str());
  }
  samples = std::max<std::size_t>(samples, 3);
  double prev1 = m1(0.0), prev2 = m2(0.0);
  for (std::size_t k = 1; k < samples; ++k) {
    const double s = alpha * static_cast<double>(k) / static_cast<double>(samples - 1);
    const double a = m1(s), b = m2(s);
    if (k + 1 < samples && !(a * b > 0.0)) {
      std::ostringstream msg;
      msg << "mobility must be positive inside (0, alpha); m(" << s << ") = " << a * b;
      fail(ErrorCode::non_positive_interior, msg.str());
    }
    if (a < prev1 - 1e-12) fail(ErrorCode::bad_parameter, "mobility factor m1 must be nondecreasing");
    if (b > prev2 + 1e-12) fail(ErrorCode::bad_parameter, "mobility factor m2 must be nonincreasing");
    prev1 = a;
    prev2 = b;
  }
}

namespace {

struct LogSplitTable {
  double alpha = 1.0;
  double h = 0.0;
  std::size_t mid = 0;
  ScalarFn m;
  ScalarFn dm;
  std::vector<double> log_m2_left;   // nodes 0..mid
  std::vector<double> log_m1_right;  // nodes mid..last, indexed from mid

  double node(std::size_t k) const { return k == 2 * mid ? alpha : h * static_cast<double>(k); }
  double f_plus(double s) const { return std::max(dm(s), 0.0) / m(s); }
  double f_minus(double s) const { return std::min(dm(s), 0.0) / m(s); }

  double cell_integral(bool plus, double a, double b) const {
    const auto r = numerics::integrate([&](double s) { return plus ? f_plus(s) : f_minus(s); }, a, b,
                                       1e-14, 1e-13);
    if (!std::isfinite(r.value) || r.error > 1e-9 * std::max(1.0, std::abs(r.value)))
      fail(ErrorCode::integral_diverged, "decompose_mobility: log-derivative quadrature did not converge");
    return r.value;
  }

  double log_m2(double s) const {  // s <= alpha/2
    const auto k = std::min(static_cast<std::size_t>(s / h), mid);
    return log_m2_left[k] + cell_integral(false, node(k), s);
  }
  double log_m1(double s) const {  // s >= alpha/2
    const auto k = std::clamp(static_cast<std::size_t>(s / h), mid, 2 * mid);
    return log_m1_right[k - mid] + cell_integral(true, node(k), s);
  }
};

double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double t) {
  const double h = x1 - x0;
  const double s = (t - x0) / h;
  return (1 + 2 * s) * (1 - s) * (1 - s) * y0 + s * (1 - s) * (1 - s) * h * d0 +
         s * s * (3 - 2 * s) * y1 + s * s * (s - 1) * h * d1;
}

double hermite_slope(double x0, double x1, double y0, double y1, double d0, double d1, double t) {
  const double h = x1 - x0;
  const double s = (t - x0) / h;
  return ((6 * s * s - 6 * s) * y0 + (-6 * s * s + 6 * s) * y1) / h + (3 * s * s - 4 * s + 1) * d0 +
         (3 * s * s - 2 * s) * d1;
}

}  // namespace

MobilityPair decompose_mobility(ScalarFn m, double alpha, std::size_t grid_resolution, ScalarFn dm) {
  if (!(alpha > 0.0)) fail(ErrorCode::bad_parameter, "decompose_mobility: alpha must be positive");
  if (!m) fail(ErrorCode::bad_parameter, "decompose_mobility: empty mobility");
  grid_resolution = std::max<std::size_t>(grid_resolution, 5) | 1;  // odd, so alpha/2 is a node

  if (!dm) {
    const double hd = 1e-6 * alpha;
    dm = [m, alpha, hd](double s) {
      const double lo = std::max(0.0, s - hd), hi = std::min(alpha, s + hd);
      return (m(hi) - m(lo)) / (hi - lo);
    };
  }

  double m_max = 0.0;
  for (std::size_t k = 1; k + 1 < grid_resolution; ++k) {
    const double s = alpha * static_cast<double>(k) / static_cast<double>(grid_resolution - 1);
    const double v = m(s);
    if (!(v > 0.0)) {
      std::ostringstream msg;
      msg << "decompose_mobility: m(" << s << ") = " << v << " is not positive inside (0, alpha)";
      fail(ErrorCode::non_positive_interior, msg.str());
    }
    m_max = std::max(m_max, v);
  }
  if (std::abs(m(0.0)) > 1e-12 * m_max || std::abs(m(alpha)) > 1e-12 * m_max)
    fail(ErrorCode::bad_parameter, "decompose_mobility: m must vanish at 0 and alpha");

  auto table = std::make_shared<LogSplitTable>();
  table->alpha = alpha;
  table->mid = (grid_resolution - 1) / 2;
  table->h = alpha / static_cast<double>(grid_resolution - 1);
  table->m = std::move(m);
  table->dm = std::move(dm);
  const std::size_t mid = table->mid;
  table->log_m2_left.assign(mid + 1, 0.0);
  for (std::size_t k = mid; k-- > 0;)
    table->log_m2_left[k] = table->log_m2_left[k + 1] - table->cell_integral(false, table->node(k), table->node(k + 1));
  table->log_m1_right.assign(mid + 1, std::log(table->m(0.5 * alpha)));
  for (std::size_t k = mid; k < 2 * mid; ++k)
    table->log_m1_right[k + 1 - mid] =
        table->log_m1_right[k - mid] + table->cell_integral(true, table->node(k), table->node(k + 1));

  const double half = 0.5 * alpha;
  MobilityPair pair;
  pair.alpha = alpha;
  pair.m2 = [table, half](double s) {
    s = std::clamp(s, 0.0, table->alpha);
    if (s <= half) return std::exp(table->log_m2(s));
    return table->m(s) / std::exp(table->log_m1(s));
  };
  pair.m1 = [table, half](double s) {
    s = std::clamp(s, 0.0, table->alpha);
    if (s >= half) return std::exp(table->log_m1(s));
    return table->m(s) / std::exp(table->log_m2(s));
  };
  pair.dm2 = [table, half](double s) {
    if (s < 0.0 || s > table->alpha) return 0.0;
    const double d = table->dm(s);
    if (s <= half) {
      const double mv = table->m(s);
      return mv > 0.0 ? std::exp(table->log_m2(s)) * std::min(d, 0.0) / mv : 0.0;
    }
    return std::min(d, 0.0) / std::exp(table->log_m1(s));
  };
  pair.dm1 = [table, half](double s) {
    if (s < 0.0 || s > table->alpha) return 0.0;
    const double d = table->dm(s);
    if (s >= half) {
      const double mv = table->m(s);
      return mv > 0.0 ? std::exp(table->log_m1(s)) * std::max(d, 0.0) / mv : 0.0;
    }
    return std::max(d, 0.0) / std::exp(table->log_m2(s));
  };
  return pair;
}

MobilityPair power_product_mobility(double a, double b, double alpha) {
  if (!(a > 0.0) || !(b > 0.0)) fail(ErrorCode::bad_parameter, "power_product: exponents must be positive");
  if (!(alpha > 0.0)) fail(ErrorCode::bad_parameter, "power_product: alpha must be positive");
  MobilityPair pair;
  pair.alpha = alpha;
  pair.m1 = [a, alpha](double s) { return std::pow(std::clamp(s, 0.0, alpha), a); };
  pair.m2 = [b, alpha](double s) { return std::pow(alpha - std::clamp(s, 0.0, alpha), b); };
  pair.dm1 = [a, alpha](double s) {
    if (s < 0.0 || s > alpha) return 0.0;
    return a == 1.0 ? 1.0 : a * std::pow(s, a - 1.0);
  };
  pair.dm2 = [b, alpha](double s) {
    if (s < 0.0 || s > alpha) return 0.0;
    return b == 1.0 ? -1.0 : -b * std::pow(alpha - s, b - 1.0);
  };
  return pair;
}

MobilityPair logistic_mobility(double alpha) { return power_product_mobility(1.0, 1.0, alpha); }

MobilityPair double_well_mobility(double alpha) {
  if (!(alpha > 0.0)) fail(ErrorCode::bad_parameter, "double_well_mobility: alpha must be positive");
  // m1 = s below alpha/4, alpha above 3alpha/4; m2 = 1 below alpha/4,
  // 1 - s/alpha above 3alpha/4; monotone C^1 cubics in between.
  const double lo = 0.25 * alpha, hi = 0.75 * alpha;
  MobilityPair pair;
  pair.alpha = alpha;
  pair.m1 = [=](double s) {
    s = std::clamp(s, 0.0, alpha);
    if (s <= lo) return s;
    if (s >= hi) return alpha;
    return hermite(lo, hi, lo, alpha, 1.0, 0.0, s);
  };
  pair.dm1 = [=](double s) {
    if (s < 0.0 || s > alpha) return 0.0;
    if (s <= lo) return 1.0;
    if (s >= hi) return 0.0;
    return hermite_slope(lo, hi, lo, alpha, 1.0, 0.0, s);
  };
  pair.m2 = [=](double s) {
    s = std::clamp(s, 0.0, alpha);
    if (s <= lo) return 1.0;
    if (s >= hi) return 1.0 - s / alpha;
    return hermite(lo, hi, 1.0, 0.25, 0.0, -1.0 / alpha, s);
  };
  pair.dm2 = [=](double s) {
    if (s < 0.0 || s > alpha) return 0.0;
    if (s <= lo) return 0.0;
    if (s >= hi) return -1.0 / alpha;
    return hermite_slope(lo, hi, 1.0, 0.25, 0.0, -1.0 / alpha, s);
  };
  return pair;
}

}  // namespace satflow
