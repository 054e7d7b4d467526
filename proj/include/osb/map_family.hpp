#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "osb/errors.hpp"
#include "osb/matrix.hpp"
#include "osb/matrix_io.hpp"
#include "osb/rational.hpp"
#include "osb/rng.hpp"

namespace osb {

/// A map {1..n} -> {1..N}, stored zero-based: g[i] is the column hit by row i.
using Map = std::vector<std::uint32_t>;

/// Families with more members than this are refused for exact enumeration.
inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

enum class FamilyKind { symmetric_group, full_mapping, explicit_list };

/// Finite multiset G of maps {1..n} -> {1..N} carrying normalized counting measure.
///
/// The two built-in kinds are implicit: members are generated on demand, and
/// their marginal and pair counts have closed forms. Explicit families keep
/// their member list; duplicates weight the measure.
class MapFamily {
 public:
  [[nodiscard]] std::size_t domain_size() const { return n_; }
  [[nodiscard]] std::size_t codomain_size() const { return codomain_; }
  [[nodiscard]] FamilyKind kind() const { return kind_; }
  [[nodiscard]] const std::vector<Map>& members() const { return members_; }
  [[nodiscard]] const std::string& descriptor() const { return descriptor_; }

  /// |G|, saturated at UINT64_MAX when it does not fit.
  [[nodiscard]] std::uint64_t size() const { return size_; }

  [[nodiscard]] bool enumerable(std::uint64_t cap = kDefaultEnumerationCap) const { return size_ <= cap; }

  void require_enumerable(std::uint64_t cap) const {
    if (!enumerable(cap))
      throw ResourceError("family " + descriptor_ + " has " + size_str() +
                          " members, above the enumeration cap " + std::to_string(cap) +
                          "; use Monte Carlo estimation");
  }

  /// Calls f(const Map&) once per member, in a fixed order.
  template <class F>
  void for_each(F&& f, std::uint64_t cap = kDefaultEnumerationCap) const {
    require_enumerable(cap);
    switch (kind_) {
      case FamilyKind::symmetric_group: {
        Map g(n_);
        std::iota(g.begin(), g.end(), 0U);
        do {
          f(static_cast<const Map&>(g));
        } while (std::next_permutation(g.begin(), g.end()));
        break;
      }
      case FamilyKind::full_mapping: {
        Map g(n_, 0U);
        const auto top = static_cast<std::uint32_t>(codomain_);
        for (;;) {
          f(static_cast<const Map&>(g));
          std::size_t i = n_;
          while (i > 0 && ++g[i - 1] == top) g[--i] = 0;
          if (i == 0) break;
        }
        break;
      }
      case FamilyKind::explicit_list:
        for (const Map& g : members_) f(g);
        break;
    }
  }

  /// Writes draw number `index` of the stream seeded by `seed` into `out`.
  /// The draw depends only on (seed, index).
  void draw(std::uint64_t seed, std::uint64_t index, Map& out) const {
    SplitMix64 rng(derive_seed(seed, index));
    out.resize(n_);
    switch (kind_) {
      case FamilyKind::symmetric_group:
        std::iota(out.begin(), out.end(), 0U);
        for (std::size_t i = n_; i > 1; --i) std::swap(out[i - 1], out[rng.below(i)]);
        break;
      case FamilyKind::full_mapping:
        for (auto& v : out) v = static_cast<std::uint32_t>(rng.below(codomain_));
        break;
      case FamilyKind::explicit_list:
        out = members_[rng.below(members_.size())];
        break;
    }
  }

  friend MapFamily symmetric_group(std::size_t n);
  friend MapFamily full_mapping_family(std::size_t n, std::size_t codomain);
  friend MapFamily explicit_family(std::size_t n, std::size_t codomain, std::vector<Map> maps, std::string descriptor);

 private:
  [[nodiscard]] std::string size_str() const {
    return size_ == std::numeric_limits<std::uint64_t>::max() ? std::string(">2^64") : std::to_string(size_);
  }

  std::size_t n_ = 0;
  std::size_t codomain_ = 0;
  FamilyKind kind_ = FamilyKind::explicit_list;
  std::vector<Map> members_;
  std::uint64_t size_ = 0;
  std::string descriptor_;
};

namespace detail {

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) return std::numeric_limits<std::uint64_t>::max();
  return r;
}

inline std::uint64_t factorial(std::size_t n) {
  std::uint64_t r = 1;
  for (std::size_t k = 2; k <= n; ++k) r = saturating_mul(r, k);
  return r;
}

inline std::uint64_t power(std::uint64_t base, std::size_t exp) {
  std::uint64_t r = 1;
  for (std::size_t k = 0; k < exp; ++k) r = saturating_mul(r, base);
  return r;
}

inline std::int64_t to_signed(std::uint64_t v) {
  if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    throw ResourceError("count does not fit in exact arithmetic");
  return static_cast<std::int64_t>(v);
}

}  // namespace detail

/// All n! permutations of {1..n}; N = n.
inline MapFamily symmetric_group(std::size_t n) {
  if (n < 1) throw DomainError("symmetric_group: n must be positive");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw DomainError("symmetric_group: n too large");
  MapFamily f;
  f.n_ = n;
  f.codomain_ = n;
  f.kind_ = FamilyKind::symmetric_group;
  f.size_ = detail::factorial(n);
  f.descriptor_ = "sym:" + std::to_string(n);
  return f;
}

/// All N^n maps {1..n} -> {1..N}.
inline MapFamily full_mapping_family(std::size_t n, std::size_t codomain) {
  if (n < 1 || codomain < 1) throw DomainError("full_mapping_family: n and N must be positive");
  if (codomain > std::numeric_limits<std::uint32_t>::max()) throw DomainError("full_mapping_family: N too large");
  MapFamily f;
  f.n_ = n;
  f.codomain_ = codomain;
  f.kind_ = FamilyKind::full_mapping;
  f.size_ = detail::power(codomain, n);
  f.descriptor_ = "map:" + std::to_string(n) + ":" + std::to_string(codomain);
  return f;
}

/// Explicit multiset of zero-based maps.
inline MapFamily explicit_family(std::size_t n, std::size_t codomain, std::vector<Map> maps,
                                 std::string descriptor = "explicit") {
  if (n < 1 || codomain < 1) throw ParseError("family: n and N must be positive");
  if (maps.empty()) throw ParseError("family: empty member list");
  for (const Map& g : maps) {
    if (g.size() != n) throw ParseError("family: map of length " + std::to_string(g.size()) + ", expected " + std::to_string(n));
    for (auto v : g)
      if (v >= codomain) throw ParseError("family: map value out of range 1.." + std::to_string(codomain));
  }
  MapFamily f;
  f.n_ = n;
  f.codomain_ = codomain;
  f.kind_ = FamilyKind::explicit_list;
  f.size_ = maps.size();
  f.members_ = std::move(maps);
  f.descriptor_ = std::move(descriptor);
  return f;
}

/// {"n": int, "N": int, "maps": [[j1, ..., jn], ...]} with one-based values.
inline MapFamily parse_family_json(const nlohmann::json& j, std::string descriptor = "explicit") {
  if (!j.is_object() || !j.contains("n") || !j.contains("N") || !j.contains("maps"))
    throw ParseError("family json needs n, N and maps");
  const auto& jn = j.at("n");
  const auto& jN = j.at("N");
  if (!jn.is_number_integer() || !jN.is_number_integer() || jn.get<long long>() < 1 || jN.get<long long>() < 1)
    throw ParseError("family json: n and N must be positive integers");
  const auto n = jn.get<std::size_t>();
  const auto codomain = jN.get<std::size_t>();
  const auto& jm = j.at("maps");
  if (!jm.is_array()) throw ParseError("family json: maps must be an array");
  std::vector<Map> maps;
  maps.reserve(jm.size());
  for (const auto& row : jm) {
    if (!row.is_array() || row.size() != n) throw ParseError("family json: ragged map");
    Map g;
    g.reserve(n);
    for (const auto& v : row) {
      if (!v.is_number_integer()) throw ParseError("family json: map values must be integers");
      const auto x = v.get<long long>();
      if (x < 1 || static_cast<std::uint64_t>(x) > codomain)
        throw ParseError("family json: value " + std::to_string(x) + " outside 1.." + std::to_string(codomain));
      g.push_back(static_cast<std::uint32_t>(x - 1));
    }
    maps.push_back(std::move(g));
  }
  return explicit_family(n, codomain, std::move(maps), std::move(descriptor));
}

inline MapFamily load_family(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return parse_family_json(j, "file:" + path);
}

inline nlohmann::json family_to_json(const MapFamily& g, std::uint64_t cap = kDefaultEnumerationCap) {
  nlohmann::json maps = nlohmann::json::array();
  g.for_each([&](const Map& m) {
    nlohmann::json row = nlohmann::json::array();
    for (auto v : m) row.push_back(v + 1);
    maps.push_back(std::move(row));
  }, cap);
  return {{"n", g.domain_size()}, {"N", g.codomain_size()}, {"maps", std::move(maps)}};
}

/// "sym:n", "map:n:N" or "file:PATH".
inline MapFamily parse_family_spec(const std::string& spec) {
  auto number = [&](const std::string& s) -> std::size_t {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      throw ParseError("bad family specifier '" + spec + "'");
    }
    if (used != s.size() || s.empty() || s[0] == '-') throw ParseError("bad family specifier '" + spec + "'");
    return static_cast<std::size_t>(v);
  };
  try {
    if (spec.rfind("sym:", 0) == 0) return symmetric_group(number(spec.substr(4)));
    if (spec.rfind("map:", 0) == 0) {
      const auto rest = spec.substr(4);
      const auto colon = rest.find(':');
      if (colon == std::string::npos) throw ParseError("bad family specifier '" + spec + "'");
      return full_mapping_family(number(rest.substr(0, colon)), number(rest.substr(colon + 1)));
    }
  } catch (const DomainError& e) {
    throw ParseError("bad family specifier '" + spec + "': " + e.what());
  }
  if (spec.rfind("file:", 0) == 0) return load_family(spec.substr(5));
  throw ParseError("bad family specifier '" + spec + "' (expected sym:n, map:n:N or file:PATH)");
}

// ---------------------------------------------------------------------------
// Measure certificates

struct MarginalCertificate {
  bool uniform = false;
  /// max |P(g(i)=j) - 1/N| over all (i, j).
  Rational worst_deviation;
  Position worst_position;
};

/// An ordered pair of distinct positions ((i1, j1), (i2, j2)).
struct PositionPair {
  Position first;
  Position second;
  friend bool operator==(const PositionPair&, const PositionPair&) = default;
};

struct PairCertificate {
  /// max over distinct pairs of P(g(i1)=j1, g(i2)=j2).
  Rational max_probability;
  /// N^2 * max_probability: the smallest constant satisfying the pair condition.
  Rational constant;
  std::optional<PositionPair> argmax;
};

struct MeasureCertificate {
  MarginalCertificate marginals;
  PairCertificate pairs;
  [[nodiscard]] bool marginals_uniform() const { return marginals.uniform; }
  [[nodiscard]] Rational c_g() const { return pairs.constant; }
};

/// Thrown when a family violates the uniform-marginal hypothesis.
class HypothesisError : public Error {
 public:
  HypothesisError(const std::string& what, MeasureCertificate cert, nlohmann::json details = {})
      : Error(what), certificate_(std::move(cert)), details_(std::move(details)) {}
  [[nodiscard]] const MeasureCertificate& certificate() const { return certificate_; }
  /// The certificate as JSON, with the family descriptor and shape.
  [[nodiscard]] const nlohmann::json& details() const { return details_; }

 private:
  MeasureCertificate certificate_;
  nlohmann::json details_;
};

/// Marginals by counting every member. Used for explicit families, and as the
/// independent route for the closed forms of the built-in kinds.
inline MarginalCertificate check_marginals_by_enumeration(const MapFamily& g,
                                                          std::uint64_t cap = kDefaultEnumerationCap) {
  const std::size_t n = g.domain_size();
  const std::size_t cols = g.codomain_size();
  std::vector<std::uint64_t> counts(n * cols, 0);
  g.for_each([&](const Map& m) {
    for (std::size_t i = 0; i < n; ++i) ++counts[i * cols + m[i]];
  }, cap);
  const auto total = detail::to_signed(g.size());
  const Rational target(1, static_cast<std::int64_t>(cols));
  MarginalCertificate cert;
  cert.uniform = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const Rational p(detail::to_signed(counts[i * cols + j]), total);
      Rational dev = p - target;
      if (dev < Rational(0)) dev = -dev;
      if (dev != Rational(0)) cert.uniform = false;
      if (dev > cert.worst_deviation) {
        cert.worst_deviation = dev;
        cert.worst_position = {i, j};
      }
    }
  }
  return cert;
}

/// Exact check that every marginal event g(i)=j has probability 1/N.
inline MarginalCertificate check_marginals(const MapFamily& g, std::uint64_t cap = kDefaultEnumerationCap) {
  if (g.kind() != FamilyKind::explicit_list) {
    // Each coordinate of a permutation or a free map is uniform on J.
    MarginalCertificate cert;
    cert.uniform = true;
    return cert;
  }
  return check_marginals_by_enumeration(g, cap);
}

/// Pair constant by counting co-occurrences (i1 < i2) over every member.
inline PairCertificate pairwise_constant_by_enumeration(const MapFamily& g,
                                                        std::uint64_t cap = kDefaultEnumerationCap) {
  const std::size_t n = g.domain_size();
  const std::size_t cols = g.codomain_size();
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  const auto key = [&](std::size_t i1, std::size_t j1, std::size_t i2, std::size_t j2) {
    return ((static_cast<std::uint64_t>(i1) * cols + j1) * n + i2) * cols + j2;
  };
  g.for_each([&](const Map& m) {
    for (std::size_t i1 = 0; i1 < n; ++i1)
      for (std::size_t i2 = i1 + 1; i2 < n; ++i2) ++counts[key(i1, m[i1], i2, m[i2])];
  }, cap);

  std::uint64_t best_count = 0;
  std::uint64_t best_key = std::numeric_limits<std::uint64_t>::max();
  for (const auto& [k, c] : counts)
    if (c > best_count || (c == best_count && k < best_key)) {
      best_count = c;
      best_key = k;
    }

  PairCertificate cert;
  const auto total = detail::to_signed(g.size());
  cert.max_probability = Rational(detail::to_signed(best_count), total);
  const auto sq = static_cast<std::int64_t>(cols) * static_cast<std::int64_t>(cols);
  cert.constant = cert.max_probability * Rational(sq);
  if (best_count > 0) {
    std::uint64_t k = best_key;
    const std::size_t j2 = k % cols;
    k /= cols;
    const std::size_t i2 = k % n;
    k /= n;
    const std::size_t j1 = k % cols;
    const std::size_t i1 = k / cols;
    cert.argmax = PositionPair{{i1, j1}, {i2, j2}};
  } else if (cols >= 2) {
    // Only same-row pairs exist (n = 1); they are all impossible events.
    cert.argmax = PositionPair{{0, 0}, {0, 1}};
  }
  return cert;
}

/// C_G = N^2 * max over distinct pairs of P(g(i1)=j1, g(i2)=j2), exactly.
inline PairCertificate pairwise_constant(const MapFamily& g, std::uint64_t cap = kDefaultEnumerationCap) {
  const std::size_t n = g.domain_size();
  const std::size_t cols = g.codomain_size();
  if (g.kind() == FamilyKind::explicit_list) return pairwise_constant_by_enumeration(g, cap);
  PairCertificate cert;
  if (n < 2) {
    if (cols >= 2) cert.argmax = PositionPair{{0, 0}, {0, 1}};
    return cert;
  }
  const auto sq = static_cast<std::int64_t>(cols) * static_cast<std::int64_t>(cols);
  if (g.kind() == FamilyKind::symmetric_group) {
    // (n-2)! of the n! permutations extend a compatible pair with i1 != i2, j1 != j2.
    const auto nn = static_cast<std::int64_t>(n);
    cert.max_probability = Rational(1, nn * (nn - 1));
    cert.argmax = PositionPair{{0, 0}, {1, 1}};
  } else {
    cert.max_probability = Rational(1, sq);
    cert.argmax = PositionPair{{0, 0}, {1, 0}};
  }
  cert.constant = cert.max_probability * Rational(sq);
  return cert;
}

inline MeasureCertificate certify(const MapFamily& g, std::uint64_t cap = kDefaultEnumerationCap) {
  return {check_marginals(g, cap), pairwise_constant(g, cap)};
}

inline nlohmann::json certificate_to_json(const MapFamily& g, const MeasureCertificate& c) {
  auto rat = [](const Rational& r) { return nlohmann::json{{"num", r.num()}, {"den", r.den()}, {"value", r.to_double()}}; };
  auto pos = [](Position p) { return nlohmann::json::array({p.row + 1, p.col + 1}); };
  nlohmann::json j;
  j["family"] = g.descriptor();
  j["n"] = g.domain_size();
  j["N"] = g.codomain_size();
  j["size"] = g.size();
  j["marginals_uniform"] = c.marginals.uniform;
  j["worst_marginal_deviation"] = rat(c.marginals.worst_deviation);
  j["max_pair_probability"] = rat(c.pairs.max_probability);
  j["C_G"] = rat(c.pairs.constant);
  if (c.pairs.argmax)
    j["argmax_pair"] = nlohmann::json::array({pos(c.pairs.argmax->first), pos(c.pairs.argmax->second)});
  else
    j["argmax_pair"] = nullptr;
  return j;
}

/// Throws HypothesisError unless the marginals are exactly uniform.
inline MeasureCertificate require_hypotheses(const MapFamily& g, std::uint64_t cap = kDefaultEnumerationCap) {
  MeasureCertificate cert = certify(g, cap);
  if (!cert.marginals_uniform())
    throw HypothesisError("family " + g.descriptor() + " does not have uniform marginals (worst deviation " +
                              cert.marginals.worst_deviation.str() + ")",
                          cert, certificate_to_json(g, cert));
  return cert;
}

/// `count` i.i.d. uniform members, reproducible from `seed`.
inline std::vector<Map> sample(const MapFamily& g, std::uint64_t seed, std::size_t count) {
  if (count < 1) throw DomainError("sample: count must be positive");
  std::vector<Map> out(count);
  for (std::size_t k = 0; k < count; ++k) g.draw(seed, k, out[k]);
  return out;
}

}  // namespace osb
