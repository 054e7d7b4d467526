#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "osb/map_family.hpp"

namespace {

using osb::Rational;

TEST(MapFamily, SizesAndMembers) {
  EXPECT_EQ(osb::symmetric_group(4).size(), 24u);
  EXPECT_EQ(osb::full_mapping_family(3, 4).size(), 64u);
  EXPECT_EQ(osb::symmetric_group(25).size(), UINT64_MAX);
  EXPECT_FALSE(osb::symmetric_group(11).enumerable());
  EXPECT_THROW(osb::symmetric_group(11).for_each([](const osb::Map&) {}), osb::ResourceError);
  EXPECT_THROW(osb::symmetric_group(0), osb::DomainError);
  EXPECT_THROW(osb::full_mapping_family(2, 0), osb::DomainError);
}

TEST(MapFamily, EnumerationMatchesRecursiveListing) {
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t cols = 1; cols <= 4; ++cols) {
      std::set<osb::Map> seen;
      osb::full_mapping_family(n, cols).for_each([&](const osb::Map& g) { seen.insert(g); });
      const auto all = osb::oracle::all_maps(n, cols, false);
      ASSERT_EQ(seen, std::set<osb::Map>(all.begin(), all.end()));
    }
  for (std::size_t n = 1; n <= 5; ++n) {
    std::set<osb::Map> seen;
    osb::symmetric_group(n).for_each([&](const osb::Map& g) { seen.insert(g); });
    const auto all = osb::oracle::all_maps(n, n, true);
    ASSERT_EQ(seen, std::set<osb::Map>(all.begin(), all.end()));
  }
}

TEST(Certificate, SymmetricGroupConstant) {
  EXPECT_EQ(osb::pairwise_constant(osb::symmetric_group(3)).constant, Rational(3, 2));
  EXPECT_EQ(osb::pairwise_constant(osb::symmetric_group(2)).constant, Rational(2));
  EXPECT_EQ(osb::pairwise_constant(osb::symmetric_group(1)).constant, Rational(0));
  for (std::size_t n = 2; n <= 7; ++n)
    EXPECT_EQ(osb::certify(osb::symmetric_group(n)).c_g(), Rational(static_cast<std::int64_t>(n), n - 1));
}

TEST(Certificate, FullMappingConstantIsOne) {
  for (std::size_t n = 2; n <= 4; ++n)
    for (std::size_t cols = 1; cols <= 4; ++cols)
      EXPECT_EQ(osb::certify(osb::full_mapping_family(n, cols)).c_g(), Rational(1));
}

TEST(Certificate, ClosedFormsAgreeWithEnumeration) {
  std::vector<osb::MapFamily> families;
  for (std::size_t n = 1; n <= 6; ++n) families.push_back(osb::symmetric_group(n));
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t cols = 1; cols <= 4; ++cols) families.push_back(osb::full_mapping_family(n, cols));
  for (const auto& g : families) {
    const auto closed = osb::pairwise_constant(g);
    const auto counted = osb::pairwise_constant_by_enumeration(g);
    EXPECT_EQ(closed.max_probability, counted.max_probability) << g.descriptor();
    EXPECT_EQ(closed.constant, counted.constant) << g.descriptor();
    EXPECT_EQ(closed.argmax.has_value(), counted.argmax.has_value()) << g.descriptor();
    if (closed.argmax && counted.argmax) {
      EXPECT_EQ(closed.argmax->first, counted.argmax->first) << g.descriptor();
      EXPECT_EQ(closed.argmax->second, counted.argmax->second) << g.descriptor();
    }
    const auto m1 = osb::check_marginals(g);
    const auto m2 = osb::check_marginals_by_enumeration(g);
    EXPECT_TRUE(m1.uniform);
    EXPECT_TRUE(m2.uniform);
    EXPECT_EQ(m2.worst_deviation, Rational(0));
  }
}

TEST(Certificate, PairProbabilityMatchesDirectCount) {
  const auto g = osb::symmetric_group(4);
  const auto maps = osb::oracle::all_maps(4, 4, true);
  Rational best;
  for (std::size_t i1 = 0; i1 < 4; ++i1)
    for (std::size_t j1 = 0; j1 < 4; ++j1)
      for (std::size_t i2 = 0; i2 < 4; ++i2)
        for (std::size_t j2 = 0; j2 < 4; ++j2) {
          if (i1 == i2 && j1 == j2) continue;
          std::int64_t hits = 0;
          for (const auto& m : maps) hits += (m[i1] == j1 && m[i2] == j2) ? 1 : 0;
          best = std::max(best, Rational(hits, static_cast<std::int64_t>(maps.size())));
        }
  EXPECT_EQ(osb::pairwise_constant(g).max_probability, best);
}

TEST(Certificate, NonUniformFamilyIsRejected) {
  const auto g = osb::explicit_family(2, 2, {{0, 0}, {0, 0}}, "constant");
  const auto cert = osb::certify(g);
  EXPECT_FALSE(cert.marginals_uniform());
  EXPECT_EQ(cert.marginals.worst_deviation, Rational(1, 2));
  try {
    osb::require_hypotheses(g);
    FAIL() << "expected HypothesisError";
  } catch (const osb::HypothesisError& e) {
    EXPECT_FALSE(e.certificate().marginals_uniform());
    EXPECT_EQ(e.details().at("family"), "constant");
    EXPECT_EQ(e.details().at("marginals_uniform"), false);
  }
}

TEST(Certificate, ExplicitSwapFamilyMatchesSymmetricGroup) {
  const auto g = osb::parse_family_json(nlohmann::json::parse(R"({"n":2,"N":2,"maps":[[1,2],[2,1]]})"));
  const auto cert = osb::require_hypotheses(g);
  EXPECT_EQ(cert.c_g(), Rational(2));
  EXPECT_EQ(g.size(), 2u);
  const auto j = osb::certificate_to_json(g, cert);
  EXPECT_EQ(j.at("C_G").at("num"), 2);
  EXPECT_EQ(j.at("C_G").at("den"), 1);
}

TEST(FamilyIo, RoundTripAndErrors) {
  const auto g = osb::symmetric_group(3);
  const auto back = osb::parse_family_json(osb::family_to_json(g));
  EXPECT_EQ(back.size(), 6u);
  EXPECT_EQ(osb::certify(back).c_g(), Rational(3, 2));
  EXPECT_THROW(osb::parse_family_json(nlohmann::json::parse(R"({"n":2,"N":2})")), osb::ParseError);
  EXPECT_THROW(osb::parse_family_json(nlohmann::json::parse(R"({"n":2,"N":2,"maps":[[1,3]]})")), osb::ParseError);
  EXPECT_THROW(osb::parse_family_json(nlohmann::json::parse(R"({"n":2,"N":2,"maps":[[1]]})")), osb::ParseError);
  EXPECT_THROW(osb::parse_family_spec("sym:x"), osb::ParseError);
  EXPECT_THROW(osb::parse_family_spec("map:2"), osb::ParseError);
  EXPECT_THROW(osb::parse_family_spec("sym:0"), osb::ParseError);
  EXPECT_THROW(osb::parse_family_spec("perm:3"), osb::ParseError);
  EXPECT_EQ(osb::parse_family_spec("map:2:3").size(), 9u);
  EXPECT_EQ(osb::parse_family_spec("sym:4").descriptor(), "sym:4");
}

TEST(Sampling, ReproducibleAndValid) {
  const auto g = osb::symmetric_group(6);
  const auto a = osb::sample(g, 42, 50);
  EXPECT_EQ(a, osb::sample(g, 42, 50));
  EXPECT_NE(a, osb::sample(g, 43, 50));
  for (const auto& m : a) {
    std::set<std::uint32_t> values(m.begin(), m.end());
    ASSERT_EQ(values.size(), 6u);
    ASSERT_LT(*values.rbegin(), 6u);
  }
  // Prefix property: draw k does not depend on how many draws were requested.
  const auto shorter = osb::sample(g, 42, 10);
  EXPECT_TRUE(std::equal(shorter.begin(), shorter.end(), a.begin()));
}

TEST(Sampling, EmpiricalFrequenciesAreUniform) {
  // 10^5 draws from map:2:3: every one of the 9 maps has frequency within
  // 4 standard errors of 1/9.
  const auto g = osb::full_mapping_family(2, 3);
  const std::size_t draws = 100000;
  std::map<osb::Map, std::size_t> counts;
  for (const auto& m : osb::sample(g, 2024, draws)) ++counts[m];
  EXPECT_EQ(counts.size(), 9u);
  const double p = 1.0 / 9.0;
  const double se = std::sqrt(p * (1 - p) / draws);
  for (const auto& [m, c] : counts) EXPECT_NEAR(static_cast<double>(c) / draws, p, 4 * se);

  const auto s = osb::symmetric_group(3);
  std::map<osb::Map, std::size_t> perm_counts;
  for (const auto& m : osb::sample(s, 7, draws)) ++perm_counts[m];
  EXPECT_EQ(perm_counts.size(), 6u);
  const double q = 1.0 / 6.0;
  const double se6 = std::sqrt(q * (1 - q) / draws);
  for (const auto& [m, c] : perm_counts) EXPECT_NEAR(static_cast<double>(c) / draws, q, 4 * se6);
}

}  // namespace
