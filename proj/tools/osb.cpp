// Command-line front end: verification campaigns, family certificates,
// seeded sampling and corpus generation.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osb/osb.hpp"

namespace {

enum ExitCode { kPass = 0, kFail = 1, kUsage = 2, kHypothesis = 3 };

struct CommonFlags {
  std::string family = "auto";
  std::string matrix;
  std::string corpus;
  std::string ell;
  std::string p_list;
  std::optional<std::uint64_t> mc_samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> enum_cap;
  std::optional<std::size_t> workers;
  std::optional<std::string> format;
  std::string out;
  std::string config;
  bool summary = false;
  bool reduce_top = false;
};

osb::Settings settings_from(const CommonFlags& f) {
  std::map<std::string, std::string> flags;
  if (f.seed) flags["seed"] = std::to_string(*f.seed);
  if (f.mc_samples) flags["mc_samples"] = std::to_string(*f.mc_samples);
  if (f.enum_cap) flags["enum_cap"] = std::to_string(*f.enum_cap);
  if (f.workers) flags["workers"] = std::to_string(*f.workers);
  if (f.format) flags["format"] = *f.format;
  std::map<std::string, std::string> file;
  if (!f.config.empty()) file = osb::parse_key_value(osb::read_text_file(f.config));
  const osb::EnvLookup env = [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
  return osb::resolve_settings(flags, env, file);
}

std::vector<double> parse_p_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw osb::ParseError("bad p list '" + text + "'");
    }
    if (used != item.size()) throw osb::ParseError("bad p list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw osb::ParseError("empty p list");
  return out;
}

std::vector<osb::CorpusEntry> load_inputs(const CommonFlags& f) {
  if (!f.matrix.empty() && !f.corpus.empty()) throw osb::ParseError("--matrix and --corpus are exclusive");
  if (!f.matrix.empty()) {
    osb::CorpusEntry e;
    e.id = f.matrix;
    e.matrix = osb::load_matrix(f.matrix);
    return {std::move(e)};
  }
  if (!f.corpus.empty()) return osb::load_corpus(f.corpus);
  return osb::generate_corpus(osb::default_corpus_spec());
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw osb::ParseError("cannot write " + path);
  out << text;
}

void print_summary(const osb::ReportSet& set, std::ostream& os) {
  os << "pass " << set.summary.pass << "  fail " << set.summary.fail << "  vacuous " << set.summary.vacuous << "\n";
  for (const auto& [id, c] : set.summary.by_check)
    os << "  " << id << ": pass " << c.pass << ", fail " << c.fail << ", vacuous " << c.vacuous
       << ", worst margin " << osb::format_real(c.worst_margin) << "\n";
  for (const auto& [k, v] : set.summary.statistics) os << "  " << k << " = " << osb::format_real(v) << "\n";
}

void add_common(CLI::App* cmd, CommonFlags& f, bool with_p) {
  cmd->add_option("--family", f.family, "auto | sym:n | map:n:N | file:PATH");
  cmd->add_option("--matrix", f.matrix, "Single matrix file (CSV or JSON)");
  cmd->add_option("--corpus", f.corpus, "Corpus JSON file (default: built-in corpus)");
  cmd->add_option("--ell", f.ell, "ell range A..B");
  if (with_p) cmd->add_option("--p", f.p_list, "Comma-separated p values");
  cmd->add_option("--mc-samples", f.mc_samples, "Monte Carlo samples when a family exceeds the enumeration cap");
  cmd->add_option("--seed", f.seed, "Monte Carlo seed");
  cmd->add_option("--enum-cap", f.enum_cap, "Largest family enumerated exactly");
  cmd->add_option("--workers", f.workers, "Worker threads");
  cmd->add_option("--out", f.out, "Report file (default: stdout)");
  cmd->add_option("--format", f.format, "json | csv");
  cmd->add_option("--config", f.config, "key = value settings file");
  cmd->add_flag("--summary", f.summary, "Print pass/fail counts and worst margins");
  cmd->add_flag("--reduce-top", f.reduce_top, "Zero all but the ell*N largest entries first");
}

int run_campaign(const std::string& name, const CommonFlags& f) {
  const osb::Settings s = settings_from(f);
  osb::CampaignOptions opts;
  opts.family = f.family;
  opts.estimate.enumeration_cap = s.enum_cap;
  opts.estimate.mc_samples = s.mc_samples;
  opts.estimate.seed = s.seed;
  opts.workers = s.workers;
  opts.reduce_top = f.reduce_top;
  if (!f.ell.empty()) opts.ell = osb::parse_ell_range(f.ell);
  if (!f.p_list.empty()) opts.p_values = parse_p_list(f.p_list);

  const auto corpus = load_inputs(f);
  osb::ReportSet set;
  if (name == "verify-main")
    set = osb::run_verify_main(corpus, opts);
  else if (name == "verify-lp")
    set = osb::run_verify_lp(corpus, opts);
  else
    set = osb::run_lemmas(corpus, opts);

  if (set.summary.statistics.count("jobs") && set.summary.statistics.at("jobs") == 0.0)
    throw osb::ParseError("no input matrix has the shape of family " + f.family);

  const std::string text = s.format == "csv" ? osb::reports_to_csv_text(set) : osb::reports_to_json_text(set);
  if (!f.out.empty() || !f.summary) write_output(f.out, text);
  if (f.summary) print_summary(set, std::cout);
  return set.summary.all_pass() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order-statistic averages over random map families: bound verification"};
  app.require_subcommand(1);

  CommonFlags main_flags;
  CommonFlags lp_flags;
  CommonFlags lemma_flags;
  add_common(app.add_subcommand("verify-main", "Two-sided bound for averages of the ell largest path entries"),
             main_flags, false);
  add_common(app.add_subcommand("verify-lp", "Two-sided bound for expected l_p norms of paths"), lp_flags, true);
  add_common(app.add_subcommand("lemmas", "Tail, averaging and k-th maximum inequalities"), lemma_flags, false);

  std::string check_family;
  std::optional<std::uint64_t> check_cap;
  std::string check_out;
  auto* family_check = app.add_subcommand("family-check", "Exact marginal and pair certificate for a family");
  family_check->add_option("--family", check_family, "sym:n | map:n:N | file:PATH")->required();
  family_check->add_option("--enum-cap", check_cap, "Largest family enumerated exactly");
  family_check->add_option("--out", check_out, "Output file (default: stdout)");

  std::string sample_family;
  std::uint64_t sample_seed = 1;
  std::size_t sample_count = 10;
  std::string sample_out;
  auto* sample_cmd = app.add_subcommand("sample", "Seeded i.i.d. draws from a family");
  sample_cmd->add_option("--family", sample_family, "sym:n | map:n:N | file:PATH")->required();
  sample_cmd->add_option("--seed", sample_seed, "Seed");
  sample_cmd->add_option("--count", sample_count, "Number of draws");
  sample_cmd->add_option("--out", sample_out, "Output file (default: stdout)");

  std::uint64_t corpus_seed = osb::kDefaultCorpusSeed;
  std::string corpus_out;
  auto* corpus_cmd = app.add_subcommand("corpus", "Corpus tools");
  corpus_cmd->require_subcommand(1);
  auto* corpus_gen = corpus_cmd->add_subcommand("gen", "Write the default corpus");
  corpus_gen->add_option("--seed", corpus_seed, "Corpus seed");
  corpus_gen->add_option("--out", corpus_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  try {
    for (const auto* name : {"verify-main", "verify-lp", "lemmas"}) {
      if (!app.got_subcommand(name)) continue;
      const CommonFlags& f = std::string(name) == "verify-main" ? main_flags
                             : std::string(name) == "verify-lp" ? lp_flags
                                                                : lemma_flags;
      return run_campaign(name, f);
    }
    if (family_check->parsed()) {
      const auto r = osb::run_family_check(check_family, check_cap.value_or(osb::kDefaultEnumerationCap));
      write_output(check_out, osb::canonical_dump(osb::certificate_to_json(r.family, r.certificate)) + "\n");
      return r.certificate.marginals_uniform() ? kPass : kHypothesis;
    }
    if (sample_cmd->parsed()) {
      const osb::MapFamily g = osb::parse_family_spec(sample_family);
      nlohmann::json maps = nlohmann::json::array();
      for (const auto& m : osb::sample(g, sample_seed, sample_count)) {
        nlohmann::json row = nlohmann::json::array();
        for (auto v : m) row.push_back(v + 1);
        maps.push_back(std::move(row));
      }
      const nlohmann::json doc{{"family", g.descriptor()}, {"seed", sample_seed}, {"n", g.domain_size()},
                               {"N", g.codomain_size()}, {"maps", std::move(maps)}};
      write_output(sample_out, osb::canonical_dump(doc) + "\n");
      return kPass;
    }
    if (corpus_gen->parsed()) {
      const auto spec = osb::default_corpus_spec(corpus_seed);
      write_output(corpus_out, osb::canonical_dump(osb::corpus_to_json(spec, osb::generate_corpus(spec))) + "\n");
      return kPass;
    }
  } catch (const osb::HypothesisError& e) {
    std::cerr << "hypothesis failure: " << e.what() << "\n";
    if (!e.details().is_null()) std::cerr << osb::canonical_dump(e.details()) << "\n";
    return kHypothesis;
  } catch (const osb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
