#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "osb/errors.hpp"
#include "osb/matrix.hpp"
#include "osb/matrix_io.hpp"
#include "osb/rng.hpp"

namespace osb {

enum class EntryDistribution { uniform, integer_grid, sparse };

inline const char* to_string(EntryDistribution d) {
  switch (d) {
    case EntryDistribution::uniform: return "uniform";
    case EntryDistribution::integer_grid: return "integer";
    case EntryDistribution::sparse: return "sparse";
  }
  return "?";
}

inline EntryDistribution parse_distribution(const std::string& s) {
  if (s == "uniform") return EntryDistribution::uniform;
  if (s == "integer") return EntryDistribution::integer_grid;
  if (s == "sparse") return EntryDistribution::sparse;
  throw ParseError("unknown entry distribution '" + s + "'");
}

/// `per_cell` matrices drawn from one entry distribution.
struct CorpusStratum {
  EntryDistribution distribution = EntryDistribution::uniform;
  std::size_t per_cell = 0;
  /// Probability of a nonzero entry (sparse only).
  double density = 0.3;
};

struct CorpusSpec {
  std::vector<std::pair<std::size_t, std::size_t>> dimensions;
  std::vector<CorpusStratum> strata;
  std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kDefaultCorpusSeed = 20140917;

/// (n, N) in {1..5}^2; 50 uniform[0,1], 10 integer 0..9 and 10 sparse matrices per cell.
inline CorpusSpec default_corpus_spec(std::uint64_t seed = kDefaultCorpusSeed) {
  CorpusSpec spec;
  for (std::size_t n = 1; n <= 5; ++n)
    for (std::size_t cols = 1; cols <= 5; ++cols) spec.dimensions.emplace_back(n, cols);
  spec.strata = {{EntryDistribution::uniform, 50, 0.3},
                 {EntryDistribution::integer_grid, 10, 0.3},
                 {EntryDistribution::sparse, 10, 0.3}};
  spec.seed = seed;
  return spec;
}

struct CorpusEntry {
  std::string id;
  EntryDistribution distribution = EntryDistribution::uniform;
  Matrix matrix;
};

/// One matrix, determined by (seed, n, N, distribution, index) alone.
inline Matrix generate_matrix(std::size_t n, std::size_t cols, const CorpusStratum& stratum, std::uint64_t seed,
                              std::size_t index) {
  std::uint64_t key = derive_seed(seed, n);
  key = derive_seed(key, cols);
  key = derive_seed(key, static_cast<std::uint64_t>(stratum.distribution));
  SplitMix64 rng(derive_seed(key, index));
  std::vector<double> e(n * cols);
  for (double& v : e) {
    switch (stratum.distribution) {
      case EntryDistribution::uniform: v = rng.unit(); break;
      case EntryDistribution::integer_grid: v = static_cast<double>(rng.below(10)); break;
      case EntryDistribution::sparse: {
        const bool nonzero = rng.unit() < stratum.density;
        const double u = rng.unit();
        v = nonzero ? u : 0.0;
        break;
      }
    }
  }
  return Matrix(n, cols, std::move(e));
}

inline std::vector<CorpusEntry> generate_corpus(const CorpusSpec& spec) {
  std::vector<CorpusEntry> out;
  for (const auto& [n, cols] : spec.dimensions) {
    for (const auto& stratum : spec.strata) {
      for (std::size_t k = 0; k < stratum.per_cell; ++k) {
        CorpusEntry e;
        e.id = std::to_string(n) + "x" + std::to_string(cols) + "/" + to_string(stratum.distribution) + "/" +
               std::to_string(k);
        e.distribution = stratum.distribution;
        e.matrix = generate_matrix(n, cols, stratum, spec.seed, k);
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

inline nlohmann::json corpus_to_json(const CorpusSpec& spec, const std::vector<CorpusEntry>& entries) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& [n, cols] : spec.dimensions) dims.push_back({n, cols});
  nlohmann::json strata = nlohmann::json::array();
  for (const auto& s : spec.strata)
    strata.push_back({{"distribution", to_string(s.distribution)}, {"per_cell", s.per_cell}, {"density", s.density}});
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json m = matrix_to_json(e.matrix);
    m["id"] = e.id;
    m["distribution"] = to_string(e.distribution);
    mats.push_back(std::move(m));
  }
  return {{"spec", {{"dimensions", std::move(dims)}, {"strata", std::move(strata)}, {"seed", spec.seed}}},
          {"matrices", std::move(mats)}};
}

/// Reads the "matrices" array of a corpus file.
inline std::vector<CorpusEntry> corpus_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("matrices") || !j.at("matrices").is_array())
    throw ParseError("corpus json needs a matrices array");
  std::vector<CorpusEntry> out;
  std::size_t k = 0;
  for (const auto& m : j.at("matrices")) {
    CorpusEntry e;
    e.matrix = parse_matrix_json(m);
    e.id = m.contains("id") && m.at("id").is_string() ? m.at("id").get<std::string>() : "matrix/" + std::to_string(k);
    if (m.contains("distribution") && m.at("distribution").is_string())
      e.distribution = parse_distribution(m.at("distribution").get<std::string>());
    out.push_back(std::move(e));
    ++k;
  }
  return out;
}

inline std::vector<CorpusEntry> load_corpus(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return corpus_from_json(j);
}

}  // namespace osb
