#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "osb/corpus.hpp"
#include "osb/interpolation.hpp"
#include "osb/map_family.hpp"
#include "osb/matrix.hpp"
#include "osb/order_stats.hpp"
#include "osb/orlicz.hpp"
#include "osb/report.hpp"

namespace osb {

/// Inclusive ell range; clipped to 1..n per matrix.
struct EllRange {
  std::size_t first = 1;
  std::size_t last = std::numeric_limits<std::size_t>::max();
};

/// Parses "A..B" or a single "A".
inline EllRange parse_ell_range(const std::string& text) {
  auto number = [&](const std::string& s) -> std::size_t {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      throw ParseError("bad ell range '" + text + "'");
    }
    if (used != s.size() || s.empty() || s[0] == '-' || v == 0) throw ParseError("bad ell range '" + text + "'");
    return static_cast<std::size_t>(v);
  };
  const auto dots = text.find("..");
  EllRange r;
  if (dots == std::string::npos) {
    r.first = r.last = number(text);
  } else {
    r.first = number(text.substr(0, dots));
    r.last = number(text.substr(dots + 2));
  }
  if (r.first > r.last) throw ParseError("bad ell range '" + text + "': empty");
  return r;
}

struct CampaignOptions {
  EstimateOptions estimate;
  /// "auto" (symmetric group on square cells plus full mappings on every cell),
  /// or a single specifier "sym:n", "map:n:N", "file:PATH".
  std::string family = "auto";
  EllRange ell;
  std::vector<double> p_values{1.0, 1.5, 2.0, 3.0};
  /// Zero everything but the ell*N largest entries before the order-statistic bounds.
  bool reduce_top = false;
  std::size_t workers = 1;
};

/// Families used by a campaign, built and certified once each.
class FamilyPool {
 public:
  explicit FamilyPool(const CampaignOptions& opts) : opts_(opts) {
    if (opts.family != "auto") fixed_ = std::make_shared<Entry>(make_entry(parse_family_spec(opts.family)));
  }

  struct Entry {
    MapFamily family;
    MeasureCertificate certificate;
  };

  /// Families applicable to an n x N matrix. Throws HypothesisError for a
  /// family without uniform marginals.
  std::vector<std::shared_ptr<const Entry>> for_shape(std::size_t n, std::size_t cols) {
    std::vector<std::shared_ptr<const Entry>> out;
    if (fixed_) {
      if (fixed_->family.domain_size() == n && fixed_->family.codomain_size() == cols) out.push_back(fixed_);
      return out;
    }
    if (n == cols) out.push_back(cached("sym:" + std::to_string(n), [&] { return symmetric_group(n); }));
    out.push_back(cached("map:" + std::to_string(n) + ":" + std::to_string(cols),
                         [&] { return full_mapping_family(n, cols); }));
    return out;
  }

 private:
  Entry make_entry(MapFamily g) const {
    MeasureCertificate c = require_hypotheses(g, opts_.estimate.enumeration_cap);
    return {std::move(g), std::move(c)};
  }

  template <class Make>
  std::shared_ptr<const Entry> cached(const std::string& key, Make make) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto e = std::make_shared<const Entry>(make_entry(make()));
    cache_.emplace(key, e);
    return e;
  }

  CampaignOptions opts_;
  std::shared_ptr<const Entry> fixed_;
  std::map<std::string, std::shared_ptr<const Entry>> cache_;
};

namespace detail {

/// Runs job(i) for i in [0, count) on `workers` threads; results are kept in
/// index order so the merge does not depend on scheduling.
template <class Job>
std::vector<std::vector<VerificationReport>> run_jobs(std::size_t count, std::size_t workers, const Job& job) {
  std::vector<std::vector<VerificationReport>> results(count);
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = job(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          results[i] = job(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

inline ReportSet merge(std::vector<std::vector<VerificationReport>> parts) {
  ReportSet set;
  for (auto& p : parts)
    for (auto& r : p) set.reports.push_back(std::move(r));
  return set;
}

struct Job {
  const CorpusEntry* entry;
  std::shared_ptr<const FamilyPool::Entry> family;
};

inline std::vector<Job> plan_jobs(const std::vector<CorpusEntry>& corpus, FamilyPool& pool) {
  std::vector<Job> jobs;
  for (const auto& e : corpus)
    for (auto& f : pool.for_shape(e.matrix.rows(), e.matrix.cols())) jobs.push_back({&e, std::move(f)});
  return jobs;
}

inline std::pair<std::size_t, std::size_t> clip(const EllRange& r, std::size_t n) {
  return {std::max<std::size_t>(1, r.first), std::min(r.last, n)};
}

}  // namespace detail

/// Two-sided order-statistic bound for every matrix, family and ell:
///   c/N sum_{j<=ell N} s(j) <= E sum_{k<=ell} kmax <= 2/N sum_{j<=ell N} s(j),
/// c = 1/(32(1+2C_G)^2) with the exact C_G, plus the fixed example constants
/// (1/800 for permutations, 1/288 for full mappings) and the Orlicz-norm form of the
/// upper bound.
inline ReportSet run_verify_main(const std::vector<CorpusEntry>& corpus, const CampaignOptions& opts) {
  FamilyPool pool(opts);
  const auto jobs = detail::plan_jobs(corpus, pool);
  auto parts = detail::run_jobs(jobs.size(), opts.workers, [&](std::size_t i) {
    const Matrix& a = jobs[i].entry->matrix;
    const MapFamily& g = jobs[i].family->family;
    const double cg = jobs[i].family->certificate.c_g().to_double();
    const double cols = static_cast<double>(a.cols());
    const std::string hash = matrix_hash(a);
    std::vector<VerificationReport> out;
    const auto [lo, hi] = detail::clip(opts.ell, a.rows());
    for (std::size_t ell = lo; ell <= hi; ++ell) {
      const Matrix subject = opts.reduce_top ? top_reduced(a, ell) : a;
      const OrderStatResult e = expected_top_sum(subject, g, ell, opts.estimate);
      const double scale = a.top_sum(ell * a.cols()) / cols;
      ReportInputs in{hash, g.descriptor(), {{"ell", static_cast<double>(ell)}}, std::nullopt};
      if (opts.reduce_top) in.params["reduced"] = 1.0;
      if (e.mode == Mode::monte_carlo) in.seed = opts.estimate.seed;
      const std::optional<double> se =
          e.mode == Mode::monte_carlo ? std::optional<double>(e.stderr_value) : std::nullopt;
      const double c = main_lower_constant(cg);
      out.push_back(decide("main/lower", in, e.value, Relation::at_least, c * scale, c, e.mode, se));
      out.push_back(decide("main/upper", in, e.value, Relation::at_most, 2.0 * scale, 2.0, e.mode, se));
      if (g.kind() == FamilyKind::symmetric_group)
        out.push_back(decide("main/lower-example", in, e.value, Relation::at_least, scale / 800.0, 1.0 / 800.0, e.mode, se));
      if (g.kind() == FamilyKind::full_mapping)
        out.push_back(decide("main/lower-example", in, e.value, Relation::at_least, scale / 288.0, 1.0 / 288.0, e.mode, se));
      const double norm = luxemburg_norm(subject.entries(), MjFunction(ell * a.cols()));
      out.push_back(decide("orlicz/upper", in, e.value, Relation::at_most, 2.0 / cols * norm, 2.0, e.mode, se));
      out.push_back(decide("orlicz/chain", in, 2.0 / cols * norm, Relation::at_most,
                           2.0 / cols * subject.top_sum(ell * a.cols()), 2.0, Mode::exact, {},
                           kLuxemburgTolerance * 2.0 * scale));
    }
    return out;
  });
  ReportSet set = detail::merge(std::move(parts));
  set.summary.statistics["jobs"] = static_cast<double>(jobs.size());
  set.finalize();
  return set;
}

/// Two-sided l_p estimate over the corpus for every p; logs the minimum lower ratio.
inline ReportSet run_verify_lp(const std::vector<CorpusEntry>& corpus, const CampaignOptions& opts) {
  for (double p : opts.p_values)
    if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p values must satisfy 1 <= p < inf");
  FamilyPool pool(opts);
  const auto jobs = detail::plan_jobs(corpus, pool);
  auto parts = detail::run_jobs(jobs.size(), opts.workers, [&](std::size_t i) {
    std::vector<VerificationReport> out;
    for (double p : opts.p_values) {
      auto r = verify_lp_bounds(jobs[i].entry->matrix, jobs[i].family->family, p, opts.estimate);
      out.insert(out.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    return out;
  });
  ReportSet set = detail::merge(std::move(parts));
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& r : set.reports)
    if (r.check_id == "lp/lower-ratio" && r.status != Status::vacuous) min_ratio = std::min(min_ratio, r.lhs);
  if (std::isfinite(min_ratio)) set.summary.statistics["min_lower_ratio"] = min_ratio;
  set.summary.statistics["jobs"] = static_cast<double>(jobs.size());
  set.finalize();
  return set;
}

/// Tail, averaging and k-th maximum inequalities behind the lower bound, over the corpus.
inline ReportSet run_lemmas(const std::vector<CorpusEntry>& corpus, const CampaignOptions& opts) {
  FamilyPool pool(opts);
  const auto jobs = detail::plan_jobs(corpus, pool);
  auto parts = detail::run_jobs(jobs.size(), opts.workers, [&](std::size_t i) {
    const Matrix& a = jobs[i].entry->matrix;
    const LemmaContext ctx = LemmaContext::make(a, jobs[i].family->family, opts.estimate.enumeration_cap);
    std::vector<VerificationReport> out = tail_lemma_checks(ctx);
    const auto [lo, hi] = detail::clip(opts.ell, a.rows());
    for (std::size_t ell = lo; ell <= hi; ++ell) {
      auto more = ell_lemma_checks(ctx, ell);
      out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }
    return out;
  });
  ReportSet set = detail::merge(std::move(parts));
  set.summary.statistics["jobs"] = static_cast<double>(jobs.size());
  set.finalize();
  return set;
}

struct FamilyCheckResult {
  MapFamily family;
  MeasureCertificate certificate;
};

inline FamilyCheckResult run_family_check(const std::string& family_spec,
                                          std::uint64_t cap = kDefaultEnumerationCap) {
  MapFamily g = parse_family_spec(family_spec);
  MeasureCertificate c = certify(g, cap);
  return {std::move(g), std::move(c)};
}

}  // namespace osb
