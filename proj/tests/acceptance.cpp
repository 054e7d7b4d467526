// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: osb_acceptance [criterion ...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "osb/osb.hpp"

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const std::vector<osb::CorpusEntry>& corpus() {
  static const std::vector<osb::CorpusEntry> c = osb::generate_corpus(osb::default_corpus_spec());
  return c;
}

const osb::ReportSet& main_campaign() {
  static const osb::ReportSet set = osb::run_verify_main(corpus(), osb::CampaignOptions{});
  return set;
}

std::size_t count_status(const osb::ReportSet& set, const std::string& id, osb::Status s) {
  const auto it = set.summary.by_check.find(id);
  if (it == set.summary.by_check.end()) return 0;
  return s == osb::Status::pass ? it->second.pass : s == osb::Status::fail ? it->second.fail : it->second.vacuous;
}

Outcome order_stat_bounds() {
  const auto start = std::chrono::steady_clock::now();
  const osb::ReportSet& set = main_campaign();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Outcome o;
  const std::size_t lower = count_status(set, "main/lower", osb::Status::pass);
  const std::size_t upper = count_status(set, "main/upper", osb::Status::pass);
  const std::size_t fails = count_status(set, "main/lower", osb::Status::fail) +
                            count_status(set, "main/upper", osb::Status::fail);
  // 70 matrices per cell, n values of ell, once for full mappings and once more on the 5 square cells.
  std::size_t expected = 0;
  for (std::size_t n = 1; n <= 5; ++n) expected += 70 * n * (5 + 1);
  o.ok = fails == 0 && lower == expected && upper == expected && secs < 300.0;
  o.detail = std::to_string(lower) + " lower + " + std::to_string(upper) + " upper pass of " +
             std::to_string(expected) + " each, " + fmt("%.1f s", secs);
  return o;
}

Outcome example_constants() {
  const osb::ReportSet& set = main_campaign();
  std::size_t sym = 0, map = 0, fail = 0;
  for (const auto& r : set.reports) {
    if (r.check_id != "main/lower-example") continue;
    if (r.status != osb::Status::pass) ++fail;
    if (r.inputs.family.rfind("sym:", 0) == 0 && r.constant == 1.0 / 800.0) ++sym;
    if (r.inputs.family.rfind("map:", 0) == 0 && r.constant == 1.0 / 288.0) ++map;
  }
  std::size_t sym_expected = 0, map_expected = 0;
  for (std::size_t n = 1; n <= 5; ++n) {
    sym_expected += 70 * n;
    map_expected += 70 * n * 5;
  }
  return {fail == 0 && sym == sym_expected && map == map_expected,
          "1/800 lines " + std::to_string(sym) + ", 1/288 lines " + std::to_string(map) + ", failures " +
              std::to_string(fail)};
}

Outcome lemma_suite() {
  const osb::ReportSet set = osb::run_lemmas(corpus(), osb::CampaignOptions{});
  Outcome o;
  static const char* ids[] = {"tail/inclusion-exclusion", "tail/second-moment", "tail/paley-zygmund",
                              "tail/first-vs-full", "tail/k-vs-full", "average/indicator", "average/general",
                              "kmax/indicator-floor"};
  for (const char* id : ids)
    if (count_status(set, id, osb::Status::pass) == 0) {
      o.ok = false;
      o.detail += std::string("no passing ") + id + "; ";
    }
  if (set.summary.fail != 0) o.ok = false;

  const osb::Matrix id2 = osb::Matrix::from_rows({{1, 0}, {0, 1}});
  double tight_margin = 1.0;
  for (const auto& r : osb::lemma_suite(id2, osb::symmetric_group(2), 1))
    if (r.check_id == "tail/inclusion-exclusion" && r.inputs.params.at("m") == 2.0) tight_margin = r.margin;
  o.ok = o.ok && std::fabs(tight_margin) < 1e-12;
  o.detail += std::to_string(set.summary.pass) + " pass, " + std::to_string(set.summary.fail) + " fail, " +
              std::to_string(set.summary.vacuous) + " vacuous; identity margin " + fmt("%.3g", tight_margin);
  return o;
}

Outcome orlicz_sandwich() {
  std::mt19937_64 rng(4001);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double tol = 1e-9;
  std::size_t checks = 0, fails = 0, property_fails = 0;
  for (std::size_t n = 1; n <= 50; ++n) {
    for (int v = 0; v < 1000; ++v) {
      std::vector<double> x(n);
      for (double& e : x) e = u(rng) < -0.5 ? 0.0 : 100 * u(rng);
      for (std::size_t j = 1; j <= n; ++j)
        for (const auto& r : osb::sandwich_check(x, j, tol)) {
          ++checks;
          if (r.status == osb::Status::fail) ++fails;
        }
      // homogeneity and triangle inequality against a second vector, j drawn at random
      const std::size_t j = 1 + rng() % n;
      const osb::MjFunction f(j);
      std::vector<double> y(n), sum(n), scaled(n);
      const double c = 10 * u(rng);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = u(rng);
        sum[i] = x[i] + y[i];
        scaled[i] = c * x[i];
      }
      const double nx = osb::luxemburg_norm(x, f, tol), ny = osb::luxemburg_norm(y, f, tol);
      const double scale = 1.0 + nx + ny;
      if (std::fabs(osb::luxemburg_norm(scaled, f, tol) - std::fabs(c) * nx) > 1e-9 * (1 + std::fabs(c)) * scale)
        ++property_fails;
      if (osb::luxemburg_norm(sum, f, tol) > nx + ny + 1e-9 * scale) ++property_fails;
    }
  }
  return {fails == 0 && property_fails == 0, std::to_string(checks) + " sandwich checks, " + std::to_string(fails) +
                                                 " fail; property failures " + std::to_string(property_fails)};
}

Outcome orlicz_upper() {
  const osb::ReportSet& set = main_campaign();
  const std::size_t pass = count_status(set, "orlicz/upper", osb::Status::pass);
  const std::size_t fail = count_status(set, "orlicz/upper", osb::Status::fail);
  double worst = 0.0;
  std::size_t points = 0;
  for (std::size_t n = 1; n <= 5; ++n)
    for (std::size_t cols = 1; cols <= 5; ++cols) {
      std::vector<osb::MapFamily> fams{osb::full_mapping_family(n, cols)};
      if (n == cols) fams.push_back(osb::symmetric_group(n));
      for (const auto& g : fams)
        for (std::size_t ell = 1; ell <= n; ++ell)
          for (const osb::Matrix& b : osb::extreme_points_bmj(n, cols, ell)) {
            const double e = osb::expectation_exact(b, g, ell).value;
            worst = std::max(worst, std::fabs(e - 2.0 / static_cast<double>(cols)));
            ++points;
          }
    }
  return {fail == 0 && pass > 0 && worst <= 1e-12,
          std::to_string(pass) + " pass, " + std::to_string(fail) + " fail; " + std::to_string(points) +
              " extreme points, max |E - 2/N| " + fmt("%.3g", worst)};
}

Outcome k_functional_oracle() {
  std::mt19937_64 rng(6001);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(1 + rng() % 20);
    for (double& v : x) v = 10 * u(rng);
    const double t = 25.0 * std::fabs(u(rng));
    worst = std::max(worst, std::fabs(osb::k_functional(x, t) - osb::oracle::k_functional_grid(x, t)));
  }
  return {worst <= 1e-9, "1000 cases, max deviation " + fmt("%.3g", worst)};
}

Outcome interpolation_quadrature() {
  double worst = 0.0;
  for (double p : {1.5, 2.0, 3.0, 5.0})
    for (std::size_t n = 1; n <= 20; ++n)
      for (double c : {1e-3, 0.7, 1.0, 42.0}) {
        std::vector<double> x(n, 0.0);
        x[n / 2] = c;
        const double expected = c * std::pow(p / (p - 1.0), 1.0 / p);
        worst = std::max(worst, std::fabs(osb::interpolation_norm(x, p) - expected) / expected);
      }
  return {worst <= 1e-8, "max relative error " + fmt("%.3g", worst)};
}

Outcome lp_bounds() {
  const osb::ReportSet set = osb::run_verify_lp(corpus(), osb::CampaignOptions{});
  std::size_t p1_upper = 0;
  for (const auto& r : set.reports)
    if (r.check_id == "lp/upper" && r.inputs.params.at("p") == 1.0) ++p1_upper;
  const std::size_t upper_fail = count_status(set, "lp/upper", osb::Status::fail);
  const std::size_t upper_pass = count_status(set, "lp/upper", osb::Status::pass);
  const std::size_t identity_pass = count_status(set, "lp/identity", osb::Status::pass);
  const auto it = set.summary.statistics.find("min_lower_ratio");
  const double min_ratio = it == set.summary.statistics.end() ? 0.0 : it->second;
  return {upper_fail == 0 && upper_pass > 0 && identity_pass == p1_upper && min_ratio > 0.0 && set.summary.all_pass(),
          std::to_string(upper_pass) + " upper pass, " + std::to_string(identity_pass) + "/" +
              std::to_string(p1_upper) + " p=1 equalities, min lower ratio " + fmt("%.6g", min_ratio) + ", " +
              std::to_string(set.summary.fail) + " failing reports"};
}

Outcome monte_carlo_consistency() {
  struct Case {
    const osb::Matrix* a;
    osb::MapFamily g;
    std::size_t ell;
  };
  // The first uniform matrices of the 2x2, 2x3, 3x2 and 3x3 cells under every
  // applicable family and ell; uniform entries keep the variance positive.
  std::vector<Case> cases;
  const std::set<std::pair<std::size_t, std::size_t>> cells{{2, 2}, {2, 3}, {3, 2}, {3, 3}};
  for (const auto& e : corpus()) {
    if (cases.size() >= 20) break;
    const std::size_t n = e.matrix.rows(), cols = e.matrix.cols();
    if (!cells.count({n, cols}) || e.distribution != osb::EntryDistribution::uniform) continue;
    if (e.id.substr(e.id.rfind('/') + 1) != "0" && e.id.substr(e.id.rfind('/') + 1) != "1") continue;
    for (std::size_t ell = 1; ell <= n && cases.size() < 20; ++ell) {
      cases.push_back({&e.matrix, osb::full_mapping_family(n, cols), ell});
      if (n == cols && cases.size() < 20) cases.push_back({&e.matrix, osb::symmetric_group(n), ell});
    }
  }
  const std::uint64_t runs = 1000, samples = 100000;
  std::size_t within = 0, total = 0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const double exact = osb::expectation_exact(*cases[c].a, cases[c].g, cases[c].ell).value;
    for (std::uint64_t r = 0; r < runs; ++r) {
      const auto mc = osb::expectation_mc(*cases[c].a, cases[c].g, cases[c].ell, samples,
                                          osb::derive_seed(9001 + c, r));
      if (std::fabs(mc.value - exact) <= osb::kMcStderrSlack * mc.stderr_value) ++within;
      ++total;
    }
  }
  const double rate = total == 0 ? 0.0 : static_cast<double>(within) / static_cast<double>(total);
  return {cases.size() == 20 && rate >= 0.99,
          std::to_string(cases.size()) + " cases, " + std::to_string(within) + "/" + std::to_string(total) +
              " runs within 4 stderr (" + fmt("%.4f", rate) + ")"};
}

Outcome reproducibility() {
  osb::CampaignOptions exact;
  osb::CampaignOptions mc;
  mc.estimate.enumeration_cap = 10;
  mc.estimate.mc_samples = 5000;
  mc.estimate.seed = 77;
  mc.workers = 3;
  const auto& c = corpus();
  const std::vector<osb::CorpusEntry> slice(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(c.size(), 700)));
  std::size_t compared = 0, differing = 0;
  auto compare = [&](const std::function<osb::ReportSet()>& run) {
    ++compared;
    if (osb::reports_to_json_text(run()) != osb::reports_to_json_text(run())) ++differing;
  };
  compare([&] { return main_campaign(); });
  compare([&] { return osb::run_verify_main(c, exact); });
  compare([&] { return osb::run_verify_main(slice, mc); });
  compare([&] { return osb::run_verify_lp(slice, exact); });
  compare([&] { return osb::run_verify_lp(slice, mc); });
  compare([&] { return osb::run_lemmas(slice, exact); });
  return {differing == 0, std::to_string(compared) + " campaigns rerun, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"order-statistic two-sided bound over the default corpus", order_stat_bounds},
      {"example constants 1/800 (permutations) and 1/288 (mappings)", example_constants},
      {"tail, averaging and k-th maximum inequalities; equality case", lemma_suite},
      {"Orlicz sandwich and Luxemburg norm properties", orlicz_sandwich},
      {"Orlicz upper bound and extreme points", orlicz_upper},
      {"K-functional against the threshold-grid oracle", k_functional_oracle},
      {"interpolation norm quadrature on single coordinates", interpolation_quadrature},
      {"l_p two-sided estimate", lp_bounds},
      {"Monte Carlo consistency", monte_carlo_consistency},
      {"byte-identical reruns", reproducibility},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::strtoul(argv[i], nullptr, 10)));

  bool all_ok = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected.empty() && !selected.count(k + 1)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all_ok = all_ok && o.ok;
    std::printf("[%s] %2zu %s: %s\n", o.ok ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return all_ok ? 0 : 1;
}
