#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "osb/errors.hpp"
#include "osb/map_family.hpp"
#include "osb/matrix.hpp"
#include "osb/order_stats.hpp"
#include "osb/quadrature.hpp"
#include "osb/report.hpp"

namespace osb {

/// t -> K(x, t; l1, l_inf) as a piecewise-linear curve with integer breakpoints.
///
/// The slope on (k-1, k) is x*_k, so K(t) = sum_{k<=floor t} x*_k + (t - floor t) x*_{ceil t}
/// and K saturates at ||x||_1 for t >= n.
class KFunctionalCurve {
 public:
  KFunctionalCurve() = default;

  /// `slopes` must already be nonincreasing and nonnegative.
  explicit KFunctionalCurve(std::vector<double> slopes) : slopes_(std::move(slopes)), prefix_(slopes_.size() + 1, 0.0) {
    for (std::size_t k = 0; k < slopes_.size(); ++k) {
      if (slopes_[k] < 0.0 || (k > 0 && slopes_[k] > slopes_[k - 1]))
        throw DomainError("KFunctionalCurve: slopes must be nonincreasing and nonnegative");
      prefix_[k + 1] = prefix_[k] + slopes_[k];
    }
  }

  static KFunctionalCurve of(std::span<const double> x) {
    std::vector<double> s(x.size());
    std::transform(x.begin(), x.end(), s.begin(), [](double v) { return std::fabs(v); });
    std::sort(s.begin(), s.end(), std::greater<>());
    return KFunctionalCurve(std::move(s));
  }

  double operator()(double t) const {
    if (t < 0.0 || std::isnan(t)) throw DomainError("K-functional needs t >= 0");
    const double n = static_cast<double>(slopes_.size());
    if (t >= n) return prefix_.back();
    const double whole = std::floor(t);
    const auto k = static_cast<std::size_t>(whole);
    return prefix_[k] + (t - whole) * slopes_[k];
  }

  [[nodiscard]] std::size_t size() const { return slopes_.size(); }
  [[nodiscard]] const std::vector<double>& slopes() const { return slopes_; }
  [[nodiscard]] double total() const { return prefix_.back(); }

  /// 0, 1, ..., n.
  [[nodiscard]] std::vector<std::size_t> breakpoints() const {
    std::vector<std::size_t> b(slopes_.size() + 1);
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = k;
    return b;
  }

 private:
  std::vector<double> slopes_;
  std::vector<double> prefix_;
};

inline double k_functional(std::span<const double> x, double t) {
  if (t < 0.0 || std::isnan(t)) throw DomainError("K-functional needs t >= 0");
  return KFunctionalCurve::of(x)(t);
}

struct Estimate {
  double value = 0.0;
  Mode mode = Mode::exact;
  std::uint64_t samples = 0;
  double stderr_value = 0.0;
};

namespace detail {

/// Mean of phi(path) over G: exact enumeration or Monte Carlo fallback.
template <class Phi>
Estimate average_over_family(const Matrix& a, const MapFamily& g, const EstimateOptions& opts, const Phi& phi) {
  require_shape(a, g);
  std::vector<double> path(a.rows());
  auto fill = [&](const Map& m) {
    for (std::size_t i = 0; i < m.size(); ++i) path[i] = a(i, m[i]);
  };
  Estimate e;
  if (g.enumerable(opts.enumeration_cap) || opts.mc_samples < 2) {
    CompensatedSum sum;
    g.for_each([&](const Map& m) {
      fill(m);
      sum.add(phi(std::span<const double>(path)));
    }, opts.enumeration_cap);
    e.value = sum.value() / static_cast<double>(g.size());
    e.samples = g.size();
    return e;
  }
  double mean = 0.0;
  double m2 = 0.0;
  Map m;
  for (std::uint64_t s = 0; s < opts.mc_samples; ++s) {
    g.draw(opts.seed, s, m);
    fill(m);
    const double v = phi(std::span<const double>(path));
    const double delta = v - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (v - mean);
  }
  e.value = mean;
  e.mode = Mode::monte_carlo;
  e.samples = opts.mc_samples;
  e.stderr_value = std::sqrt(m2 / static_cast<double>(opts.mc_samples - 1) / static_cast<double>(opts.mc_samples));
  return e;
}

}  // namespace detail

/// K(a, t) for the L1-over-G lifting of (l1, l_inf): the average of K(a(g), t).
inline double k_functional_mixed(const Matrix& a, const MapFamily& g, double t, const EstimateOptions& opts = {}) {
  if (t < 0.0 || std::isnan(t)) throw DomainError("K-functional needs t >= 0");
  return detail::average_over_family(a, g, opts, [t](std::span<const double> path) { return k_functional(path, t); })
      .value;
}

/// The mixed K-curve. K is linear in the sorted path vector, so averaging the
/// sorted paths gives the slopes of the averaged curve.
inline KFunctionalCurve mixed_k_curve(const Matrix& a, const MapFamily& g, std::uint64_t cap = kDefaultEnumerationCap) {
  const OrderStatResult r = expectation_exact(a, g, a.rows(), cap);
  std::vector<double> slopes = r.per_k;
  for (std::size_t k = 1; k < slopes.size(); ++k) slopes[k] = std::min(slopes[k], slopes[k - 1]);
  return KFunctionalCurve(std::move(slopes));
}

/// ||.||_{theta,p} with theta = 1 - 1/p and q = p, i.e. (int_0^inf t^-p K(t)^p dt)^(1/p).
///
/// (0,1): K is linear through the origin, closed form x*_1^p. [k, k+1] for
/// k = 1..n-1: 32-point Gauss-Legendre. [n, inf): closed form ||x||_1^p n^(1-p)/(p-1).
inline double interpolation_norm(const KFunctionalCurve& k, double p) {
  if (!(p > 1.0)) throw DomainError("interpolation_norm needs p > 1 (theta = 0 is excluded)");
  if (k.size() == 0 || k.total() == 0.0) return 0.0;
  const double n = static_cast<double>(k.size());
  double integral = std::pow(k.slopes().front(), p);
  const auto& rule = gauss_legendre_32();
  for (std::size_t j = 1; j < k.size(); ++j) {
    const auto lo = static_cast<double>(j);
    integral += rule.integrate([&](double t) { return std::pow(k(t) / t, p); }, lo, lo + 1.0);
  }
  integral += std::pow(k.total(), p) * std::pow(n, 1.0 - p) / (p - 1.0);
  return std::pow(integral, 1.0 / p);
}

inline double interpolation_norm(std::span<const double> x, double p) {
  if (!(p > 1.0)) throw DomainError("interpolation_norm needs p > 1 (theta = 0 is excluded)");
  return interpolation_norm(KFunctionalCurve::of(x), p);
}

inline double lp_norm(std::span<const double> x, double p) {
  if (p == 1.0) {
    double s = 0.0;
    for (double v : x) s += std::fabs(v);
    return s;
  }
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += std::pow(std::fabs(v) / m, p);
  return m * std::pow(s, 1.0 / p);
}

/// E ||(a_{i g(i)})_i||_p over G.
inline Estimate lp_expectation(const Matrix& a, const MapFamily& g, double p, const EstimateOptions& opts = {}) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("lp_expectation needs 1 <= p < inf");
  return detail::average_over_family(a, g, opts, [p](std::span<const double> path) { return lp_norm(path, p); });
}

struct LpBoundExpression {
  /// To be multiplied by the (unspecified) lower constant.
  double lower_expr = 0.0;
  double upper_expr = 0.0;
};

/// (1/N) sum_{k<=N} s(k) + ((1/N) sum_{k>N} s(k)^p)^(1/p); the same expression
/// bounds E ||a(g)||_p from above with constant 1 and from below up to a constant.
inline LpBoundExpression lp_two_sided_rhs(const Matrix& a, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("lp_two_sided_rhs needs 1 <= p < inf");
  const auto& s = a.rearrangement();
  const std::size_t cols = a.cols();
  const auto nd = static_cast<double>(cols);
  double head = 0.0;
  for (std::size_t k = 0; k < cols; ++k) head += s[k];
  double tail = 0.0;
  if (s.size() > cols) {
    if (p == 1.0) {
      for (std::size_t k = cols; k < s.size(); ++k) tail += s[k];
      tail /= nd;
    } else {
      const double scale = s[cols];
      if (scale > 0.0) {
        double acc = 0.0;
        for (std::size_t k = cols; k < s.size(); ++k) acc += std::pow(s[k] / scale, p);
        tail = scale * std::pow(acc / nd, 1.0 / p);
      }
    }
  }
  const double value = head / nd + tail;
  return {value, value};
}

/// Lower constant of the order-statistic bound, logged as a reference line.
inline double main_lower_constant(double c_g) { return 1.0 / (32.0 * (1.0 + 2.0 * c_g) * (1.0 + 2.0 * c_g)); }

/// Two-sided l_p estimate for one matrix and p:
///  - lp/upper: E||a(g)||_p <= rhs (constant 1);
///  - lp/identity (p = 1): equality;
///  - lp/lower-ratio: E||a(g)||_p / rhs, required to be strictly positive;
///  - lp/interpolation-minkowski and lp/interpolation-hardy (p > 1, exact mode):
///    ||a||_{theta,p} <= E||a(g)||_{theta,p} <= p/(p-1) E||a(g)||_p.
inline std::vector<VerificationReport> verify_lp_bounds(const Matrix& a, const MapFamily& g, double p,
                                                        const EstimateOptions& opts = {}) {
  const MeasureCertificate cert = require_hypotheses(g, opts.enumeration_cap);
  const Estimate lhs = lp_expectation(a, g, p, opts);
  const LpBoundExpression rhs = lp_two_sided_rhs(a, p);
  ReportInputs in;
  in.matrix_hash = matrix_hash(a);
  in.family = g.descriptor();
  in.params["p"] = p;
  if (lhs.mode == Mode::monte_carlo) in.seed = opts.seed;
  const std::optional<double> se =
      lhs.mode == Mode::monte_carlo ? std::optional<double>(lhs.stderr_value) : std::nullopt;

  std::vector<VerificationReport> out;
  out.push_back(decide("lp/upper", in, lhs.value, Relation::at_most, rhs.upper_expr, 1.0, lhs.mode, se));
  if (p == 1.0)
    out.push_back(decide("lp/identity", in, lhs.value, Relation::equal, rhs.upper_expr, 1.0, lhs.mode, se));

  const double reference = main_lower_constant(cert.c_g().to_double());
  if (rhs.lower_expr == 0.0) {
    out.push_back(vacuous("lp/lower-ratio", in, "zero matrix"));
  } else {
    VerificationReport r = decide("lp/lower-ratio", in, lhs.value / rhs.lower_expr, Relation::at_least, 0.0,
                                  reference, lhs.mode, se ? std::optional<double>(*se / rhs.lower_expr) : std::nullopt);
    r.status = r.lhs > 0.0 ? Status::pass : Status::fail;
    r.note = "ratio is reported; constant is the order-statistic reference line";
    out.push_back(std::move(r));
  }

  if (p > 1.0 && lhs.mode == Mode::exact) {
    const double mixed = interpolation_norm(mixed_k_curve(a, g, opts.enumeration_cap), p);
    const Estimate pathwise = detail::average_over_family(
        a, g, opts, [p](std::span<const double> path) { return interpolation_norm(path, p); });
    const double hardy = p / (p - 1.0);
    // quadrature error budget, relative
    const double quad = 1e-9;
    out.push_back(decide("lp/interpolation-minkowski", in, mixed, Relation::at_most, pathwise.value, 1.0, Mode::exact,
                         {}, quad * pathwise.value));
    out.push_back(decide("lp/interpolation-hardy", in, pathwise.value, Relation::at_most, hardy * lhs.value, hardy,
                         Mode::exact, {}, quad * pathwise.value));
  }
  return out;
}

}  // namespace osb
