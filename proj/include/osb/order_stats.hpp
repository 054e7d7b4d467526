#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "osb/errors.hpp"
#include "osb/map_family.hpp"
#include "osb/matrix.hpp"
#include "osb/rational.hpp"
#include "osb/report.hpp"

namespace osb {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// How an expectation over G is computed: exact enumeration when |G| fits the
/// cap, otherwise Monte Carlo with `mc_samples` draws (0 means refuse).
struct EstimateOptions {
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  std::uint64_t mc_samples = 0;
  std::uint64_t seed = 0;
};

struct OrderStatResult {
  /// E S = E sum_{k<=ell} kmax.
  double value = 0.0;
  /// E S_k for k = 1..ell.
  std::vector<double> per_k;
  Mode mode = Mode::exact;
  std::uint64_t samples = 0;
  double stderr_value = 0.0;
};

namespace detail {

inline void require_shape(const Matrix& a, const MapFamily& g) {
  if (a.rows() != g.domain_size() || a.cols() != g.codomain_size())
    throw DomainError("matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " but family " +
                      g.descriptor() + " maps " + std::to_string(g.domain_size()) + " -> " +
                      std::to_string(g.codomain_size()));
}

inline void require_ell(std::size_t ell, std::size_t n) {
  if (ell < 1 || ell > n) throw DomainError("ell must lie in 1..n (n = " + std::to_string(n) + ")");
}

/// Fills `buf` with the path values and moves the `ell` largest to the front, descending.
inline void top_path_values(const Matrix& a, const Map& g, std::size_t ell, std::vector<double>& buf) {
  buf.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] = a(i, g[i]);
  std::partial_sort(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(ell), buf.end(), std::greater<>());
}

}  // namespace detail

/// (a_{1,g(1)}, ..., a_{n,g(n)}).
inline std::vector<double> path_values(const Matrix& a, const Map& g) {
  if (g.size() != a.rows()) throw DomainError("path_values: map length differs from row count");
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] >= a.cols()) throw DomainError("path_values: map value out of range");
    out[i] = a(i, g[i]);
  }
  return out;
}

/// Sum of the ell largest path values.
inline double s_stat(const Matrix& a, const Map& g, std::size_t ell) {
  detail::require_ell(ell, a.rows());
  std::vector<double> v = path_values(a, g);
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(ell), v.end(), std::greater<>());
  return std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(ell), 0.0);
}

/// Average of the top-ell path sum over every member of G.
inline OrderStatResult expectation_exact(const Matrix& a, const MapFamily& g, std::size_t ell,
                                         std::uint64_t cap = kDefaultEnumerationCap) {
  detail::require_shape(a, g);
  detail::require_ell(ell, a.rows());
  g.require_enumerable(cap);
  std::vector<CompensatedSum> sums(ell);
  std::vector<double> buf;
  g.for_each([&](const Map& m) {
    detail::top_path_values(a, m, ell, buf);
    for (std::size_t k = 0; k < ell; ++k) sums[k].add(buf[k]);
  }, cap);
  OrderStatResult r;
  r.mode = Mode::exact;
  r.samples = g.size();
  r.per_k.resize(ell);
  const auto total = static_cast<double>(g.size());
  for (std::size_t k = 0; k < ell; ++k) {
    r.per_k[k] = sums[k].value() / total;
    r.value += r.per_k[k];
  }
  return r;
}

/// Sample mean of the top-ell path sum over `samples` seeded draws from G.
inline OrderStatResult expectation_mc(const Matrix& a, const MapFamily& g, std::size_t ell, std::uint64_t samples,
                                      std::uint64_t seed) {
  detail::require_shape(a, g);
  detail::require_ell(ell, a.rows());
  if (samples < 2) throw DomainError("expectation_mc: need at least 2 samples");
  // Welford updates keep a constant statistic exactly constant.
  std::vector<double> mean_k(ell, 0.0);
  double mean = 0.0;
  double m2 = 0.0;
  std::vector<double> buf;
  Map m;
  for (std::uint64_t s = 0; s < samples; ++s) {
    g.draw(seed, s, m);
    detail::top_path_values(a, m, ell, buf);
    const double count = static_cast<double>(s + 1);
    double total = 0.0;
    for (std::size_t k = 0; k < ell; ++k) {
      mean_k[k] += (buf[k] - mean_k[k]) / count;
      total += buf[k];
    }
    const double delta = total - mean;
    mean += delta / count;
    m2 += delta * (total - mean);
  }
  OrderStatResult r;
  r.mode = Mode::monte_carlo;
  r.samples = samples;
  r.per_k = std::move(mean_k);
  r.value = mean;
  const double variance = m2 / static_cast<double>(samples - 1);
  r.stderr_value = std::sqrt(std::max(variance, 0.0) / static_cast<double>(samples));
  return r;
}

/// Exact when G fits the cap; Monte Carlo fallback when opts.mc_samples >= 2.
inline OrderStatResult expected_top_sum(const Matrix& a, const MapFamily& g, std::size_t ell,
                                        const EstimateOptions& opts = {}) {
  if (g.enumerable(opts.enumeration_cap) || opts.mc_samples < 2)
    return expectation_exact(a, g, ell, opts.enumeration_cap);
  return expectation_mc(a, g, ell, opts.mc_samples, opts.seed);
}

// ---------------------------------------------------------------------------
// Intersection counts X_m = |h({1..m}) ∩ graph(g)|

/// Exact law of X_m for one m.
struct XmDistribution {
  std::size_t m = 0;
  /// probabilities[k] = P(X_m = k), k = 0..n.
  std::vector<Rational> probabilities;

  /// P(X_m >= k).
  [[nodiscard]] Rational tail(std::size_t k) const {
    Rational t;
    for (std::size_t i = k; i < probabilities.size(); ++i) t += probabilities[i];
    return t;
  }
  [[nodiscard]] Rational mean() const {
    Rational e;
    for (std::size_t k = 1; k < probabilities.size(); ++k) e += probabilities[k] * Rational(static_cast<std::int64_t>(k));
    return e;
  }
  [[nodiscard]] Rational second_moment() const {
    Rational e;
    for (std::size_t k = 1; k < probabilities.size(); ++k)
      e += probabilities[k] * Rational(static_cast<std::int64_t>(k * k));
    return e;
  }
};

namespace detail {

inline void require_order_shape(const MapFamily& g, const OrderMap& h) {
  if (h.rows() != g.domain_size() || h.cols() != g.codomain_size())
    throw DomainError("order map shape does not match family " + g.descriptor());
}

inline XmDistribution make_distribution(std::size_t m, const std::vector<std::uint64_t>& counts, std::uint64_t total) {
  XmDistribution d;
  d.m = m;
  d.probabilities.reserve(counts.size());
  for (auto c : counts) d.probabilities.emplace_back(detail::to_signed(c), detail::to_signed(total));
  return d;
}

/// Ranks of the graph positions of g, ascending.
inline void graph_ranks(const OrderMap& h, const Map& g, std::vector<std::size_t>& ranks) {
  ranks.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) ranks[i] = h.rank_of(i, g[i]);
  std::sort(ranks.begin(), ranks.end());
}

}  // namespace detail

/// Exact law of X_m by counting, for one m in 1..nN.
inline XmDistribution xm_distribution(const MapFamily& g, const OrderMap& h, std::size_t m,
                                      std::uint64_t cap = kDefaultEnumerationCap) {
  detail::require_order_shape(g, h);
  if (m < 1 || m > h.size()) throw DomainError("xm_distribution: m must lie in 1..nN");
  const std::size_t n = g.domain_size();
  std::vector<std::uint64_t> counts(n + 1, 0);
  g.for_each([&](const Map& map) {
    std::size_t x = 0;
    for (std::size_t i = 0; i < n; ++i) x += h.rank_of(i, map[i]) < m ? 1 : 0;
    ++counts[x];
  }, cap);
  return detail::make_distribution(m, counts, g.size());
}

/// Laws of X_1, ..., X_{nN} from a single pass over G (entry m-1 holds X_m).
inline std::vector<XmDistribution> xm_distributions(const MapFamily& g, const OrderMap& h,
                                                    std::uint64_t cap = kDefaultEnumerationCap) {
  detail::require_order_shape(g, h);
  const std::size_t n = g.domain_size();
  const std::size_t total_positions = h.size();
  // diff[t][m] accumulates, over g, the indicator that X_m = t, as a difference array in m.
  std::vector<std::vector<std::int64_t>> diff(n + 1, std::vector<std::int64_t>(total_positions + 2, 0));
  std::vector<std::size_t> q;
  g.for_each([&](const Map& map) {
    detail::graph_ranks(h, map, q);
    // X_m = t exactly for m in [q_t + 1, q_{t+1}] (one-based t, ranks zero-based).
    for (std::size_t t = 0; t <= n; ++t) {
      const std::size_t lo = t == 0 ? 1 : q[t - 1] + 1;
      const std::size_t hi = t == n ? total_positions : q[t];
      if (lo > hi) continue;
      ++diff[t][lo];
      --diff[t][hi + 1];
    }
  }, cap);
  std::vector<XmDistribution> out;
  out.reserve(total_positions);
  std::vector<std::int64_t> running(n + 1, 0);
  std::vector<std::uint64_t> counts(n + 1);
  for (std::size_t m = 1; m <= total_positions; ++m) {
    for (std::size_t t = 0; t <= n; ++t) {
      running[t] += diff[t][m];
      counts[t] = static_cast<std::uint64_t>(running[t]);
    }
    out.push_back(detail::make_distribution(m, counts, g.size()));
  }
  return out;
}

/// f(j) = sum_{k<=ell} P(X_{j-1} = k-1, h(j) in graph(g)), j = 1..ell*N.
/// For every b that is nonincreasing along h and vanishes past rank ell*N,
/// E S(b) = sum_j f(j) b(h(j)).
inline std::vector<double> coefficient_f(const MapFamily& g, const OrderMap& h, std::size_t ell,
                                         std::uint64_t cap = kDefaultEnumerationCap) {
  detail::require_order_shape(g, h);
  detail::require_ell(ell, g.domain_size());
  const std::size_t top = ell * g.codomain_size();
  std::vector<std::uint64_t> counts(top, 0);
  std::vector<std::size_t> q;
  g.for_each([&](const Map& map) {
    detail::graph_ranks(h, map, q);
    // h(q_t + 1) lies on the graph with exactly t - 1 graph points ranked before it.
    for (std::size_t t = 0; t < std::min(ell, q.size()); ++t)
      if (q[t] < top) ++counts[q[t]];
  }, cap);
  std::vector<double> f(top);
  for (std::size_t j = 0; j < top; ++j) f[j] = static_cast<double>(counts[j]) / static_cast<double>(g.size());
  return f;
}

// ---------------------------------------------------------------------------
// Paley-Zygmund

struct WeightedValue {
  double value = 0.0;
  double weight = 0.0;
};

/// P(Z >= theta E Z) >= (1 - theta)^2 (E Z)^2 / E Z^2 on a finite distribution.
/// Weights need not be normalized. Values within 1e-12 of the threshold count as reaching it.
inline VerificationReport paley_zygmund_check(std::span<const WeightedValue> z, double theta,
                                              ReportInputs inputs = {}) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("paley_zygmund_check: theta must lie in (0, 1)");
  double total = 0.0;
  double mean = 0.0;
  double second = 0.0;
  for (const auto& w : z) {
    if (w.value < 0.0 || w.weight < 0.0) throw DomainError("paley_zygmund_check: Z must be nonnegative");
    total += w.weight;
    mean += w.weight * w.value;
    second += w.weight * w.value * w.value;
  }
  inputs.params["theta"] = theta;
  if (total <= 0.0 || mean <= 0.0) return vacuous("tail/paley-zygmund", std::move(inputs), "E Z = 0");
  mean /= total;
  second /= total;
  const double threshold = theta * mean;
  double hit = 0.0;
  for (const auto& w : z)
    if (w.value >= threshold - kExactSlack) hit += w.weight;
  const double lhs = hit / total;
  const double rhs = (1.0 - theta) * (1.0 - theta) * mean * mean / second;
  return decide("tail/paley-zygmund", std::move(inputs), lhs, Relation::at_least, rhs, theta);
}

namespace detail {

inline VerificationReport decide_exact(std::string id, ReportInputs inputs, const Rational& lhs, Relation rel,
                                       const Rational& rhs, double constant) {
  VerificationReport r = decide(std::move(id), std::move(inputs), lhs.to_double(), rel, rhs.to_double(), constant);
  bool holds = false;
  switch (rel) {
    case Relation::at_most:
      holds = lhs <= rhs;
      r.margin = (rhs - lhs).to_double();
      break;
    case Relation::at_least:
      holds = lhs >= rhs;
      r.margin = (lhs - rhs).to_double();
      break;
    case Relation::equal:
      holds = lhs == rhs;
      r.margin = -std::fabs((lhs - rhs).to_double());
      break;
  }
  r.status = holds ? Status::pass : Status::fail;
  return r;
}

}  // namespace detail

/// Exact Paley-Zygmund check for Z = X_m with rational theta.
inline VerificationReport paley_zygmund_check(const XmDistribution& z, const Rational& theta,
                                              ReportInputs inputs = {}) {
  if (!(theta > Rational(0) && theta < Rational(1))) throw DomainError("paley_zygmund_check: theta must lie in (0, 1)");
  inputs.params["theta"] = theta.to_double();
  inputs.params["m"] = static_cast<double>(z.m);
  const Rational mean = z.mean();
  if (mean == Rational(0)) return vacuous("tail/paley-zygmund", std::move(inputs), "E Z = 0");
  const Rational threshold = theta * mean;
  Rational lhs;
  for (std::size_t k = 0; k < z.probabilities.size(); ++k)
    if (Rational(static_cast<std::int64_t>(k)) >= threshold) lhs += z.probabilities[k];
  const Rational one_minus = Rational(1) - theta;
  const Rational rhs = one_minus * one_minus * mean * mean / z.second_moment();
  return detail::decide_exact("tail/paley-zygmund", std::move(inputs), lhs, Relation::at_least, rhs,
                              theta.to_double());
}

// ---------------------------------------------------------------------------
// Tail and averaging inequalities for the lower bound

/// Everything the lemma checks share for one matrix and family.
struct LemmaContext {
  Matrix a;
  const MapFamily* family = nullptr;
  OrderMap h;
  MeasureCertificate certificate;
  /// dists[m-1] is the law of X_m.
  std::vector<XmDistribution> dists;
  std::uint64_t cap = kDefaultEnumerationCap;
  std::string matrix_hash;

  /// Certifies the hypotheses (HypothesisError when marginals are not uniform)
  /// and tabulates X_1..X_{nN} along the canonical order of `a`.
  static LemmaContext make(const Matrix& a, const MapFamily& g, std::uint64_t cap = kDefaultEnumerationCap) {
    detail::require_shape(a, g);
    g.require_enumerable(cap);
    LemmaContext ctx;
    ctx.a = a;
    ctx.family = &g;
    ctx.certificate = require_hypotheses(g, cap);
    ctx.h = order_map(a);
    ctx.dists = xm_distributions(g, ctx.h, cap);
    ctx.cap = cap;
    ctx.matrix_hash = osb::matrix_hash(a);
    return ctx;
  }

  [[nodiscard]] ReportInputs inputs(std::initializer_list<std::pair<const std::string, double>> params) const {
    ReportInputs in;
    in.matrix_hash = matrix_hash;
    in.family = family->descriptor();
    in.params = params;
    return in;
  }
  [[nodiscard]] const Rational& c_g() const { return certificate.pairs.constant; }
};

/// Checks that depend only on h and G: the inclusion-exclusion tail bound, the
/// second-moment tail bound for theta in {0.1, ..., 0.9}, and Paley-Zygmund itself.
inline std::vector<VerificationReport> tail_lemma_checks(const LemmaContext& ctx) {
  std::vector<VerificationReport> out;
  const auto cols = static_cast<std::int64_t>(ctx.a.cols());
  const Rational cg = ctx.c_g();
  const double cgd = cg.to_double();
  for (const auto& d : ctx.dists) {
    const auto m = static_cast<std::int64_t>(d.m);
    const auto md = static_cast<double>(d.m);
    // P(X_m >= 1) >= (m/N)(1 - C_G (m-1)/(2N))
    const Rational rhs1 = Rational(m, cols) * (Rational(1) - cg * Rational(m - 1, 2 * cols));
    out.push_back(detail::decide_exact("tail/inclusion-exclusion", ctx.inputs({{"m", md}}), d.tail(1),
                                       Relation::at_least, rhs1, cgd));
    for (std::int64_t t = 1; t <= 9; ++t) {
      const Rational theta(t, 10);
      // X_m >= theta m / N  <=>  10 N k >= t m for integer k
      Rational lhs;
      for (std::size_t k = 0; k < d.probabilities.size(); ++k)
        if (10 * cols * static_cast<std::int64_t>(k) >= t * m) lhs += d.probabilities[k];
      const Rational one_minus = Rational(1) - theta;
      const Rational rhs = one_minus * one_minus * Rational(m) / (Rational(cols) + Rational(m) * cg);
      out.push_back(detail::decide_exact("tail/second-moment", ctx.inputs({{"m", md}, {"theta", theta.to_double()}}),
                                         lhs, Relation::at_least, rhs, cgd));
      VerificationReport pz = paley_zygmund_check(d, theta, ctx.inputs({}));
      out.push_back(std::move(pz));
    }
  }
  return out;
}

/// Checks for one ell: tail comparisons against X_{ell N}, the averaging bounds
/// E S(avg a_m) <= (8+16C_G) E S(a_m) and E S(avg a) <= (8+16C_G) E S(a), and the
/// k-th maximum floor 1/(2+4C_G) for the ell*N-ones indicator.
inline std::vector<VerificationReport> ell_lemma_checks(const LemmaContext& ctx, std::size_t ell) {
  detail::require_ell(ell, ctx.a.rows());
  std::vector<VerificationReport> out;
  const std::size_t n = ctx.a.rows();
  const std::size_t cols = ctx.a.cols();
  const auto cols64 = static_cast<std::int64_t>(cols);
  const std::size_t nn = n * cols;
  const std::size_t top = ell * cols;
  const Rational cg = ctx.c_g();
  const double cgd = cg.to_double();
  const auto elld = static_cast<double>(ell);
  const XmDistribution& full = ctx.dists[top - 1];

  for (std::size_t m = 1; m <= nn; ++m) {
    const XmDistribution& d = ctx.dists[m - 1];
    const auto m64 = static_cast<std::int64_t>(m);
    Rational factor(m64, 2 * cols64);
    if (cg > Rational(0)) factor = std::min(factor, Rational(1) / (Rational(2) * cg));
    out.push_back(detail::decide_exact("tail/first-vs-full", ctx.inputs({{"ell", elld}, {"m", static_cast<double>(m)}}),
                                       d.tail(1), Relation::at_least, factor * full.tail(1), cgd));
    for (std::size_t k = 1; 2 * k * cols <= m; ++k) {
      const Rational rhs = full.tail(k) / (Rational(2) + Rational(4) * cg);
      out.push_back(detail::decide_exact(
          "tail/k-vs-full",
          ctx.inputs({{"ell", elld}, {"m", static_cast<double>(m)}, {"k", static_cast<double>(k)}}), d.tail(k),
          Relation::at_least, rhs, cgd));
    }
  }

  const double avg_const = 8.0 + 16.0 * cgd;
  for (std::size_t m = 1; m <= top; ++m) {
    const Matrix am = indicator_matrix(ctx.h, m, n, cols);
    const Matrix am_avg = averaged_matrix(am, ctx.h, ell);
    const double lhs = expectation_exact(am_avg, *ctx.family, ell, ctx.cap).value;
    const double es = expectation_exact(am, *ctx.family, ell, ctx.cap).value;
    out.push_back(decide("average/indicator", ctx.inputs({{"ell", elld}, {"m", static_cast<double>(m)}}), lhs,
                         Relation::at_most, avg_const * es, avg_const));
  }

  {
    const Matrix reduced = top_reduced(ctx.a, ell);
    const Matrix avg = averaged_matrix(reduced, ctx.h, ell);
    const double lhs = expectation_exact(avg, *ctx.family, ell, ctx.cap).value;
    const double es = expectation_exact(reduced, *ctx.family, ell, ctx.cap).value;
    out.push_back(decide("average/general", ctx.inputs({{"ell", elld}}), lhs, Relation::at_most, avg_const * es,
                         avg_const));
  }

  if (ell / 2 == 0) {
    out.push_back(vacuous("kmax/indicator-floor", ctx.inputs({{"ell", elld}}), "no k with 1 <= k <= ell/2"));
  } else {
    const Matrix b = indicator_matrix(ctx.h, top, n, cols);
    const OrderStatResult eb = expectation_exact(b, *ctx.family, ell, ctx.cap);
    const double floor_value = 1.0 / (2.0 + 4.0 * cgd);
    for (std::size_t k = 1; k <= ell / 2; ++k)
      out.push_back(decide("kmax/indicator-floor", ctx.inputs({{"ell", elld}, {"k", static_cast<double>(k)}}),
                           eb.per_k[k - 1], Relation::at_least, floor_value, cgd));
  }
  return out;
}

/// All tail and averaging checks for one matrix, family and ell.
inline std::vector<VerificationReport> lemma_suite(const Matrix& a, const MapFamily& g, std::size_t ell,
                                                   std::uint64_t cap = kDefaultEnumerationCap) {
  detail::require_ell(ell, a.rows());
  const LemmaContext ctx = LemmaContext::make(a, g, cap);
  std::vector<VerificationReport> out = tail_lemma_checks(ctx);
  std::vector<VerificationReport> more = ell_lemma_checks(ctx, ell);
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  return out;
}

}  // namespace osb
