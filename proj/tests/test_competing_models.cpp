#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace usermodel;
using namespace testing_support;

namespace {

std::vector<double> crime_row(std::size_t type, double lon, std::size_t zone) {
  return {static_cast<double>(type), lon, static_cast<double>(zone)};
}

Dataset crimes() {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < 24; ++i) rows.push_back(crime_row(i % 8, static_cast<double>(i % 5), i % 3));
  return make_dataset({categorical("type", letters(8)), continuous("lon"), categorical("zone", letters(3))}, rows);
}

double posterior_sum(const CompetingModels& cm) {
  double s = 0;
  for (double p : cm.posteriors()) s += p;
  return s;
}

}  // namespace

TEST(CmInit, UniformPriorOverSubsets) {
  auto d = make_dataset({continuous("a"), continuous("b"), categorical("c", {"u", "v"})}, {{0, 0, 0}, {1, 2, 1}});
  CompetingModels cm(d, CmConfig{});
  ASSERT_EQ(cm.model_count(), 8u);
  for (CompetingModels::Mask m = 0; m < 8; ++m) EXPECT_NEAR(cm.posterior(m), 0.125, 1e-15);
}

TEST(CmInit, TooManyAttributes) {
  std::vector<AttributeSchema> schema;
  for (int j = 0; j < 17; ++j) schema.push_back(categorical("a" + std::to_string(j), {"u", "v"}));
  auto d = make_dataset(schema, {std::vector<double>(17, 0.0), std::vector<double>(17, 1.0)});
  try {
    CompetingModels cm(d, CmConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooManyAttributes);
    EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("16"), std::string::npos);
  }
}

TEST(CmPredictive, NullModelIsUniform) {
  auto d = crimes();
  CompetingModels cm(d, CmConfig{});
  for (std::size_t x = 0; x < d.size(); ++x) EXPECT_NEAR(cm.predictive(0, x), 1.0 / 24.0, 1e-15);
  cm.observe(event(d, 3, 1));
  for (std::size_t x = 0; x < d.size(); ++x) EXPECT_NEAR(cm.predictive(0, x), 1.0 / 24.0, 1e-15);
}

TEST(CmPredictive, SmoothedCategoryMass) {
  auto d = crimes();
  CompetingModels cm(d, CmConfig{});
  for (int t = 1; t <= 3; ++t) cm.observe(event(d, 0, t));  // type A three times
  EXPECT_NEAR(cm.attribute_term(0, 0), 4.0 / 11.0, 1e-15);
  EXPECT_NEAR(cm.attribute_term(0, 1), 1.0 / 11.0, 1e-15);
}

TEST(CmPredictive, FactorizesAcrossAttributes) {
  auto d = crimes();
  CompetingModels cm(d, CmConfig{});
  for (int t = 1; t <= 4; ++t) cm.observe(event(d, static_cast<std::size_t>(t * 5 % 24), t));
  auto unnorm = [&](CompetingModels::Mask m, std::size_t x) {
    double p = 1;
    for (std::size_t j = 0; j < 3; ++j) {
      if (m >> j & 1) p *= cm.attribute_term(j, d.value(x, j));
    }
    return p;
  };
  const CompetingModels::Mask both = 0b011;
  for (std::size_t x = 1; x < d.size(); ++x) {
    // Normalized predictive ratios equal ratios of the factor products.
    EXPECT_NEAR(cm.predictive(both, x) / cm.predictive(both, 0), unnorm(both, x) / unnorm(both, 0), 1e-9);
  }
  double total = 0;
  for (std::size_t x = 0; x < d.size(); ++x) total += cm.predictive(both, x);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(CmObserve, MatchesFullEnumerationOracle) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 10; ++i) rows.push_back({static_cast<double>(rng() % 100) / 10.0, static_cast<double>(rng() % 3)});
    auto d = make_dataset({continuous("x"), categorical("c", letters(3))}, rows);
    std::vector<std::size_t> clicks{rng() % 10, rng() % 10, rng() % 10};
    CompetingModels cm(d, CmConfig{});
    for (std::size_t t = 0; t < clicks.size(); ++t) cm.observe(event(d, clicks[t], static_cast<std::int64_t>(t + 1)));
    const auto oracle = oracle_cm_enumeration(d, clicks, 0.1, 1.0);
    for (CompetingModels::Mask m = 0; m < 4; ++m) EXPECT_NEAR(cm.posterior(m), oracle.posterior[m], 1e-9);
    const auto bias = cm.bias_all();
    EXPECT_NEAR(bias.values[0], oracle.posterior[1] + oracle.posterior[3], 1e-9);
    EXPECT_NEAR(bias.values[1], oracle.posterior[2] + oracle.posterior[3], 1e-9);
    const auto raw = cm.average_predictive();
    for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(raw[i], oracle.bma[i], 1e-12);
    const auto want = rescale_unit(oracle.bma);
    const auto got = cm.rank_all().values;
    for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(got[i], want[i], 1e-9);
  }
}

TEST(CmObserve, PosteriorStaysNormalized) {
  auto d = random_dataset(60, 4, 31);
  CompetingModels cm(d, CmConfig{});
  std::mt19937_64 rng(2);
  for (int t = 1; t <= 50; ++t) {
    cm.observe(event(d, rng() % d.size(), t));
    ASSERT_NEAR(posterior_sum(cm), 1.0, 1e-9);
  }
}

TEST(CmObserve, ConstantCategoryConcentratesOnModelsWithIt) {
  auto d = crimes();
  CompetingModels cm(d, CmConfig{});
  std::size_t i = 0;
  for (int t = 1; t <= 30; ++t) {
    cm.observe(event(d, (i % 3) * 8, t));  // always type A, lon and zone vary
    ++i;
  }
  EXPECT_GT(cm.bias_all().at("type"), 0.99);
}

TEST(CmObserve, UniformClicksFavourNullOverSingles) {
  auto d = crimes();
  CompetingModels cm(d, CmConfig{});
  std::mt19937_64 rng(17);
  for (int t = 1; t <= 200; ++t) cm.observe(event(d, rng() % d.size(), t));
  EXPECT_GE(cm.posterior(0), cm.posterior(0b001));
  EXPECT_GE(cm.posterior(0), cm.posterior(0b100));
}

TEST(CmRank, NoObservationsIsHalf) {
  auto d = crimes();
  CompetingModels cm(d, CmConfig{});
  for (double v : cm.rank_all().values) EXPECT_EQ(v, 0.5);
}

TEST(CmBias, UniformPosteriorGivesHalf) {
  auto d = crimes();
  CompetingModels cm(d, CmConfig{});
  for (double v : cm.bias_all().values) EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(CmRank, UnweightedAverageFlag) {
  auto d = make_dataset({categorical("c", letters(3))}, {{0}, {1}, {2}, {0}});
  CmConfig cfg;
  cfg.unweighted_bma = true;
  CompetingModels cm(d, cfg);
  cm.observe(event(d, 0, 1));
  cm.observe(event(d, 3, 2));
  // Plain sum of the null (1/4 each) and {c} predictives.
  std::vector<double> raw(4);
  for (std::size_t x = 0; x < 4; ++x) raw[x] = 0.25 + cm.predictive(1, x);
  const auto want = rescale_unit(raw);
  const auto got = cm.rank_all().values;
  for (std::size_t x = 0; x < 4; ++x) EXPECT_NEAR(got[x], want[x], 1e-12);
}

TEST(CmConfigChecks, Rejected) {
  auto d = crimes();
  CmConfig c;
  c.alpha = 0;
  EXPECT_THROW(CompetingModels(d, c), Error);
  c = CmConfig{};
  c.bandwidth = -1;
  EXPECT_THROW(CompetingModels(d, c), Error);
}
