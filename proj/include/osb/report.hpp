#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace osb {

enum class Relation { at_most, at_least, equal };
enum class Status { pass, fail, vacuous };
enum class Mode { exact, monte_carlo };

/// Absolute slack used for every exact-mode comparison.
inline constexpr double kExactSlack = 1e-12;
/// Monte Carlo comparisons allow this many standard errors.
inline constexpr double kMcStderrSlack = 4.0;

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::vacuous: return "vacuous";
  }
  return "?";
}
inline const char* to_string(Mode m) { return m == Mode::exact ? "exact" : "mc"; }
inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::at_most: return "<=";
    case Relation::at_least: return ">=";
    case Relation::equal: return "==";
  }
  return "?";
}

struct ReportInputs {
  std::string matrix_hash;
  std::string family;
  /// Named scalar parameters: ell, p, m, k, theta, j, ...
  std::map<std::string, double> params;
  std::optional<std::uint64_t> seed;
};

/// One checked inequality: lhs (relation) rhs.
struct VerificationReport {
  std::string check_id;
  ReportInputs inputs;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
  /// Signed so that a nonnegative margin means the inequality holds.
  double margin = 0.0;
  Relation relation = Relation::at_most;
  Status status = Status::pass;
  Mode mode = Mode::exact;
  std::optional<double> stderr_value;
  std::string note;
};

/// Builds a report and decides its status. Exact mode allows kExactSlack (plus
/// `extra_slack`); Monte Carlo mode allows kMcStderrSlack standard errors.
inline VerificationReport decide(std::string check_id, ReportInputs inputs, double lhs, Relation rel, double rhs,
                                 double constant, Mode mode = Mode::exact, std::optional<double> stderr_value = {},
                                 double extra_slack = 0.0) {
  VerificationReport r;
  r.check_id = std::move(check_id);
  r.inputs = std::move(inputs);
  r.lhs = lhs;
  r.rhs = rhs;
  r.constant = constant;
  r.relation = rel;
  r.mode = mode;
  r.stderr_value = stderr_value;
  switch (rel) {
    case Relation::at_most: r.margin = rhs - lhs; break;
    case Relation::at_least: r.margin = lhs - rhs; break;
    case Relation::equal: r.margin = -std::fabs(lhs - rhs); break;
  }
  double slack = extra_slack;
  if (mode == Mode::monte_carlo)
    slack += kMcStderrSlack * stderr_value.value_or(0.0);
  else
    slack += kExactSlack;
  r.status = (r.margin >= -slack) ? Status::pass : Status::fail;
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) r.status = Status::fail;
  return r;
}

inline VerificationReport vacuous(std::string check_id, ReportInputs inputs, std::string note) {
  VerificationReport r;
  r.check_id = std::move(check_id);
  r.inputs = std::move(inputs);
  r.status = Status::vacuous;
  r.note = std::move(note);
  return r;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json in;
  in["matrix_hash"] = r.inputs.matrix_hash;
  in["family"] = r.inputs.family;
  for (const auto& [k, v] : r.inputs.params) in[k] = v;
  in["seed"] = r.inputs.seed ? nlohmann::json(*r.inputs.seed) : nlohmann::json(nullptr);
  nlohmann::json j;
  j["check_id"] = r.check_id;
  j["inputs"] = std::move(in);
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["relation"] = to_string(r.relation);
  j["constant"] = r.constant;
  j["margin"] = r.margin;
  j["status"] = to_string(r.status);
  j["mode"] = to_string(r.mode);
  j["stderr"] = r.stderr_value ? nlohmann::json(*r.stderr_value) : nlohmann::json(nullptr);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

/// Reals with 17 significant digits; non-finite values become null.
inline std::string format_real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Canonical JSON text: sorted keys (nlohmann objects are ordered maps), no
/// whitespace, reals via format_real. Identical values give identical bytes.
inline void write_canonical(const nlohmann::json& j, std::string& out) {
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(k).dump();
        out += ':';
        write_canonical(v, out);
      }
      out += '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        write_canonical(v, out);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::number_float:
      out += format_real(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

inline std::string canonical_dump(const nlohmann::json& j) {
  std::string out;
  write_canonical(j, out);
  return out;
}

/// Stable key: check id, then the canonical text of the inputs.
inline std::string sort_key(const VerificationReport& r) {
  return r.check_id + '\x1f' + canonical_dump(to_json(r)["inputs"]);
}

inline void sort_reports(std::vector<VerificationReport>& reports) {
  std::vector<std::pair<std::string, std::size_t>> keys;
  keys.reserve(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) keys.emplace_back(sort_key(reports[i]), i);
  std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<VerificationReport> sorted;
  sorted.reserve(reports.size());
  for (const auto& [k, i] : keys) sorted.push_back(std::move(reports[i]));
  reports = std::move(sorted);
}

struct CheckSummary {
  std::size_t pass = 0;
  std::size_t fail = 0;
  std::size_t vacuous = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
};

struct ReportSummary {
  std::map<std::string, CheckSummary> by_check;
  std::size_t pass = 0;
  std::size_t fail = 0;
  std::size_t vacuous = 0;
  /// Extra named statistics a campaign wants to log (e.g. a minimum ratio).
  std::map<std::string, double> statistics;

  [[nodiscard]] bool all_pass() const { return fail == 0; }
};

inline ReportSummary summarize(const std::vector<VerificationReport>& reports) {
  ReportSummary s;
  for (const auto& r : reports) {
    auto& c = s.by_check[r.check_id];
    switch (r.status) {
      case Status::pass: ++c.pass; ++s.pass; break;
      case Status::fail: ++c.fail; ++s.fail; break;
      case Status::vacuous: ++c.vacuous; ++s.vacuous; break;
    }
    if (r.status != Status::vacuous) c.worst_margin = std::min(c.worst_margin, r.margin);
  }
  return s;
}

inline nlohmann::json to_json(const ReportSummary& s) {
  nlohmann::json checks = nlohmann::json::object();
  for (const auto& [id, c] : s.by_check)
    checks[id] = {{"pass", c.pass}, {"fail", c.fail}, {"vacuous", c.vacuous},
                  {"worst_margin", std::isfinite(c.worst_margin) ? nlohmann::json(c.worst_margin) : nlohmann::json(nullptr)}};
  nlohmann::json stats = nlohmann::json::object();
  for (const auto& [k, v] : s.statistics) stats[k] = v;
  return {{"pass", s.pass}, {"fail", s.fail}, {"vacuous", s.vacuous}, {"checks", std::move(checks)},
          {"statistics", std::move(stats)}};
}

/// A campaign's output: sorted reports plus their summary.
struct ReportSet {
  std::vector<VerificationReport> reports;
  ReportSummary summary;

  void finalize() {
    auto stats = std::move(summary.statistics);
    sort_reports(reports);
    summary = summarize(reports);
    summary.statistics = std::move(stats);
  }
};

inline std::string reports_to_json_text(const ReportSet& set) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : set.reports) arr.push_back(to_json(r));
  return canonical_dump(nlohmann::json{{"reports", std::move(arr)}, {"summary", to_json(set.summary)}}) + "\n";
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Flat CSV, one row per report; params rendered as key=value pairs joined by ';'.
inline std::string reports_to_csv_text(const ReportSet& set) {
  std::string out = "check_id,matrix_hash,family,params,seed,lhs,relation,rhs,constant,margin,status,mode,stderr,note\n";
  for (const auto& r : set.reports) {
    std::string params;
    for (const auto& [k, v] : r.inputs.params) {
      if (!params.empty()) params += ';';
      params += k + "=" + format_real(v);
    }
    out += csv_escape(r.check_id) + ',' + r.inputs.matrix_hash + ',' + csv_escape(r.inputs.family) + ',' +
           csv_escape(params) + ',' + (r.inputs.seed ? std::to_string(*r.inputs.seed) : std::string()) + ',' +
           format_real(r.lhs) + ',' + to_string(r.relation) + ',' + format_real(r.rhs) + ',' +
           format_real(r.constant) + ',' + format_real(r.margin) + ',' + to_string(r.status) + ',' +
           to_string(r.mode) + ',' + (r.stderr_value ? format_real(*r.stderr_value) : std::string()) + ',' +
           csv_escape(r.note) + '\n';
  }
  return out;
}

}  // namespace osb
