#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace osb {

/// Gauss-Legendre nodes and weights on [-1, 1].
template <std::size_t Points>
struct GaussLegendreRule {
  std::array<double, Points> nodes{};
  std::array<double, Points> weights{};

  GaussLegendreRule() {
    // Newton iteration on P_n from the Chebyshev-like initial guess; symmetric fill.
    constexpr std::size_t half = (Points + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
      double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(Points) + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = 0.0;
        for (std::size_t k = 1; k <= Points; ++k) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * static_cast<double>(k) - 1.0) * z * p1 - (static_cast<double>(k) - 1.0) * p2) /
               static_cast<double>(k);
        }
        dp = static_cast<double>(Points) * (z * p0 - p1) / (z * z - 1.0);
        const double step = p0 / dp;
        z -= step;
        if (std::fabs(step) < 1e-16) break;
      }
      nodes[i] = -z;
      nodes[Points - 1 - i] = z;
      const double w = 2.0 / ((1.0 - z * z) * dp * dp);
      weights[i] = w;
      weights[Points - 1 - i] = w;
    }
  }

  /// Integral of f over [a, b].
  template <class F>
  double integrate(const F& f, double a, double b) const {
    const double mid = 0.5 * (a + b);
    const double half_width = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < Points; ++i) s += weights[i] * f(mid + half_width * nodes[i]);
    return s * half_width;
  }
};

/// Shared 32-point rule.
inline const GaussLegendreRule<32>& gauss_legendre_32() {
  static const GaussLegendreRule<32> rule;
  return rule;
}

}  // namespace osb
