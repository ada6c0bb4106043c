#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Upwind map for m1 = s, m2 = 1 - s, U = s^2 written out directly.
struct LogisticQuadratic {
  double dt;
  std::function<double(double)> v;  // V(x)

  std::vector<double> H(const std::vector<double>& rho) const {
    const std::size_t n = rho.size();
    const double dx = 1.0 / static_cast<double>(n);
    std::vector<double> flux(n + 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double xi_l = 2.0 * rho[i] + v((i + 0.5) * dx);
      const double xi_r = 2.0 * rho[i + 1] + v((i + 1.5) * dx);
      const double vel = -(xi_r - xi_l) / dx;
      flux[i + 1] = vel > 0.0 ? rho[i] * (1.0 - rho[i + 1]) * vel : rho[i + 1] * (1.0 - rho[i]) * vel;
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = rho[i] + dt / dx * (flux[i + 1] - flux[i]);
    return out;
  }

  // Relaxed fixed-point iteration rho <- rho - omega (H(rho) - rho_prev).
  std::vector<double> picard(const std::vector<double>& rho_prev, double omega = 1e-3, double tol = 1e-12) const {
    std::vector<double> rho = rho_prev;
    for (long it = 0; it < 50000000; ++it) {
      const auto h = H(rho);
      double res = 0.0;
      for (std::size_t i = 0; i < rho.size(); ++i) res += std::abs(h[i] - rho_prev[i]);
      if (res <= tol) break;
      for (std::size_t i = 0; i < rho.size(); ++i) rho[i] -= omega * (h[i] - rho_prev[i]);
    }
    return rho;
  }
};

}  // namespace oracle
