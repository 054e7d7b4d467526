#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <numeric>
#include <ranges>
#include <span>
#include <vector>

#include "osb/errors.hpp"
#include "osb/map_family.hpp"
#include "osb/matrix.hpp"
#include "osb/order_stats.hpp"
#include "osb/report.hpp"

namespace osb {

/// Convex M: [0, inf) -> [0, inf) with M(0) = 0, not constant, that can say
/// where it is strictly convex.
template <class M>
concept OrliczFunction = requires(const M& f, double t) {
  { f(t) } -> std::convertible_to<double>;
  { f.strictly_convex_at(t) } -> std::convertible_to<bool>;
};

/// M_j(t) = max(t - 1/j, 0). The Luxemburg norm it induces lies between half the
/// sum of the j largest |x_i| and that sum.
class MjFunction {
 public:
  explicit MjFunction(std::size_t j) : j_(j) {
    if (j < 1) throw DomainError("M_j needs j >= 1");
    kink_ = 1.0 / static_cast<double>(j);
  }

  double operator()(double t) const { return t <= kink_ ? 0.0 : t - kink_; }

  /// Only the kink 1/j is not interior to a linear piece.
  [[nodiscard]] bool strictly_convex_at(double t) const { return t == kink_; }

  [[nodiscard]] std::size_t parameter() const { return j_; }
  [[nodiscard]] double kink() const { return kink_; }

 private:
  std::size_t j_;
  double kink_;
};

inline MjFunction mj_function(std::size_t j) { return MjFunction(j); }

/// Default relative width of the final Luxemburg bisection bracket.
inline constexpr double kLuxemburgTolerance = 1e-12;

template <OrliczFunction M>
double orlicz_modular(std::span<const double> x, const M& f, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("orlicz_modular needs lambda > 0");
  double s = 0.0;
  for (double v : x) s += f(std::fabs(v) / lambda);
  return s;
}

/// ||x||_M = inf{lambda > 0 : sum M(|x_i| / lambda) <= 1}.
///
/// Bisects on [max|x_i| * 1e-6, sum|x_i| + 1] until the bracket's relative width
/// is at most `tol` and returns the upper end, at which the modular is <= 1.
template <OrliczFunction M>
double luxemburg_norm(std::span<const double> x, const M& f, double tol = kLuxemburgTolerance) {
  if (!(tol > 0.0)) throw DomainError("luxemburg_norm: tol must be positive");
  double max_abs = 0.0;
  double sum_abs = 0.0;
  for (double v : x) {
    max_abs = std::max(max_abs, std::fabs(v));
    sum_abs += std::fabs(v);
  }
  if (max_abs == 0.0) return 0.0;
  double lo = max_abs * 1e-6;
  double hi = sum_abs + 1.0;
  while (orlicz_modular(x, f, hi) > 1.0) hi *= 2.0;
  while (lo > 0.0 && orlicz_modular(x, f, lo) <= 1.0) lo *= 0.5;
  while (hi - lo > tol * hi) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (orlicz_modular(x, f, mid) <= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Sum of the j largest |x_i|.
inline double top_abs_sum(std::span<const double> x, std::size_t j) {
  std::vector<double> v(x.size());
  std::transform(x.begin(), x.end(), v.begin(), [](double t) { return std::fabs(t); });
  j = std::min(j, v.size());
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(j), v.end(), std::greater<>());
  return std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(j), 0.0);
}

/// (1/2) sum_{i<=j} x*_i <= ||x||_{M_j} <= sum_{i<=j} x*_i.
/// Both sides are checked with slack tol * (sum x*) + 1e-12; the norm comes from
/// bisection with relative tolerance `tol`.
inline std::vector<VerificationReport> sandwich_check(std::span<const double> x, std::size_t j,
                                                      double tol = kLuxemburgTolerance, ReportInputs inputs = {}) {
  if (j < 1 || j > x.size()) throw DomainError("sandwich_check: j must lie in 1..n");
  const double top = top_abs_sum(x, j);
  const double norm = luxemburg_norm(x, MjFunction(j), tol);
  inputs.params["j"] = static_cast<double>(j);
  inputs.params["n"] = static_cast<double>(x.size());
  const double slack = tol * top;
  std::vector<VerificationReport> out;
  out.push_back(decide("orlicz/sandwich-lower", inputs, norm, Relation::at_least, 0.5 * top, 0.5, Mode::exact, {},
                       slack));
  out.push_back(decide("orlicz/sandwich-upper", std::move(inputs), norm, Relation::at_most, top, 1.0, Mode::exact,
                       {}, slack));
  return out;
}

/// The n*N matrices with every entry 1/(ell N) except one entry 1 + 1/(ell N):
/// the positive extreme points of the unit ball of M_{ell N}. Index k puts the
/// large entry at row-major position k.
inline Matrix extreme_point_bmj(std::size_t n, std::size_t cols, std::size_t ell, std::size_t index) {
  if (ell < 1 || ell > n) throw DomainError("extreme_points_bmj: ell must lie in 1..n");
  if (index >= n * cols) throw DomainError("extreme_points_bmj: index out of range");
  const double base = 1.0 / static_cast<double>(ell * cols);
  std::vector<double> e(n * cols, base);
  e[index] = 1.0 + base;
  return Matrix(n, cols, std::move(e));
}

/// Lazy, index-driven range over all extreme_point_bmj(n, N, ell, k).
inline auto extreme_points_bmj(std::size_t n, std::size_t cols, std::size_t ell) {
  if (ell < 1 || ell > n) throw DomainError("extreme_points_bmj: ell must lie in 1..n");
  return std::views::iota(std::size_t{0}, n * cols) |
         std::views::transform([=](std::size_t k) { return extreme_point_bmj(n, cols, ell, k); });
}

/// E sum_{k<=ell} kmax a_{i g(i)} <= (2/N) ||a||_{M_{ell N}}.
inline VerificationReport upper_bound_check(const Matrix& a, const MapFamily& g, std::size_t ell,
                                            const EstimateOptions& opts = {}, double tol = kLuxemburgTolerance) {
  require_hypotheses(g, opts.enumeration_cap);
  const OrderStatResult e = expected_top_sum(a, g, ell, opts);
  const double norm = luxemburg_norm(a.entries(), MjFunction(ell * a.cols()), tol);
  const double rhs = 2.0 / static_cast<double>(a.cols()) * norm;
  ReportInputs in;
  in.matrix_hash = matrix_hash(a);
  in.family = g.descriptor();
  in.params["ell"] = static_cast<double>(ell);
  if (e.mode == Mode::monte_carlo) in.seed = opts.seed;
  return decide("orlicz/upper", std::move(in), e.value, Relation::at_most, rhs, 2.0, e.mode,
                e.mode == Mode::monte_carlo ? std::optional<double>(e.stderr_value) : std::nullopt);
}

}  // namespace osb
