#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace usermodel;
using namespace testing_support;

namespace {

// 80 points: eight equally frequent types and a continuous column.
Dataset eight_types() {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 80; ++i) rows.push_back({static_cast<double>(i % 8), static_cast<double>(i) / 79.0});
  return make_dataset({categorical("type", letters(8)), continuous("x")}, rows);
}

std::vector<std::size_t> all_points(const Dataset& d) {
  std::vector<std::size_t> h(d.size());
  std::iota(h.begin(), h.end(), std::size_t{0});
  return h;
}

}  // namespace

TEST(Hellinger, Examples) {
  const std::vector<double> half{0.5, 0.5};
  EXPECT_EQ(hellinger_distance(half, half), 0.0);
  EXPECT_NEAR(hellinger_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 1.0, 1e-15);
  EXPECT_NEAR(hellinger_distance(half, std::vector<double>{0.9, 0.1}), 0.32492, 1e-5);
  EXPECT_THROW(hellinger_distance(half, std::vector<double>{1.0}), Error);
}

TEST(Hellinger, SymmetricBoundedZeroOnlyWhenEqual) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + rng() % 6;
    std::vector<double> p(m), q(m);
    double sp = 0, sq = 0;
    for (std::size_t j = 0; j < m; ++j) {
      p[j] = u(rng) < 0.2 ? 0.0 : u(rng);
      q[j] = u(rng);
      sp += p[j];
      sq += q[j];
    }
    if (sp == 0) continue;
    for (auto& v : p) v /= sp;
    for (auto& v : q) v /= sq;
    const double h = hellinger_distance(p, q);
    EXPECT_EQ(h, hellinger_distance(q, p));
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 1.0);
    EXPECT_GT(h, 0.0);
    EXPECT_EQ(hellinger_distance(p, p), 0.0);
  }
}

TEST(Hellinger, BinnedAttribute) {
  auto d = eight_types();
  auto bins = default_binnings(d, 4);
  EXPECT_NEAR(hellinger_bias(d, all_points(d), 1, bins), 0.0, 1e-12);
  // Only the first bin is touched; p puts 1/4 there.
  const std::vector<std::size_t> low{0, 1, 2, 3};
  EXPECT_NEAR(hellinger_bias(d, low, 1, bins), std::sqrt(0.5 * (std::pow(0.5 - 1.0, 2) + 3 * 0.25)), 1e-9);
  try {
    hellinger_bias(d, {}, 0, bins);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyHistory);
  }
}

TEST(DistributionPair, ProportionsSumToOne) {
  auto d = random_dataset(70, 4, 5);
  auto disc = discretize(d, default_binnings(d, 5));
  const std::vector<std::size_t> hist{1, 5, 5, 9, 30};
  for (std::size_t j = 0; j < d.dims(); ++j) {
    const auto pair = distribution_pair(d, disc, hist, j);
    EXPECT_NEAR(std::accumulate(pair.p.begin(), pair.p.end(), 0.0), 1.0, 1e-12);
    EXPECT_NEAR(std::accumulate(pair.q.begin(), pair.q.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(AttributeDistribution, Examples) {
  auto d = eight_types();
  const auto whole = all_points(d);
  EXPECT_NEAR(attribute_distribution_bias(d, whole, 0).value, 0.0, 1e-12);
  EXPECT_EQ(attribute_distribution_bias(d, whole, 1).value, 0.0);
  std::vector<std::size_t> arson;
  for (int i = 0; i < 20; ++i) arson.push_back(static_cast<std::size_t>(8 * (i % 10)));
  const auto one_hot = attribute_distribution_bias(d, arson, 0);
  EXPECT_GE(one_hot.value, 0.999);
  EXPECT_FALSE(one_hot.test.assumption_ok);
  try {
    attribute_distribution_bias(d, {}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyHistory);
  }
}

TEST(AttributeDistribution, BoundedOnRandomHistories) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto d = random_dataset(50, 3, 300 + seed);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> h;
    for (int i = 0; i < 12; ++i) h.push_back(rng() % d.size());
    for (std::size_t j = 0; j < d.dims(); ++j) {
      const double v = attribute_distribution_bias(d, h, j).value;
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(BiasModels, AdFlagsAssumptionsAndAcUsesHellinger) {
  auto d = eight_types();
  AttributeDistributionModel ad(d);
  AdaptiveContextualization ac(d, 4);
  EXPECT_FALSE(ad.capabilities().predicts);
  EXPECT_TRUE(ad.capabilities().detects_bias);
  EXPECT_TRUE(ad.assumptions_ok());
  EXPECT_THROW(ad.bias_all(), Error);
  EXPECT_THROW(ac.bias_all(), Error);
  for (int t = 1; t <= 20; ++t) {
    const auto e = event(d, static_cast<std::size_t>(8 * (t % 10)), t);
    ad.observe(e);
    ac.observe(e);
  }
  EXPECT_FALSE(ad.assumptions_ok());
  const auto b = ad.bias_all();
  EXPECT_EQ(b.names, (std::vector<std::string>{"type", "x"}));
  EXPECT_GE(b.at("type"), 0.999);
  // One of eight equally likely types: sqrt(1/2 ((1 - sqrt(1/8))^2 + 7/8)).
  const double h = std::sqrt(0.5 * (std::pow(1 - std::sqrt(0.125), 2) + 7 * 0.125));
  EXPECT_NEAR(ac.bias_all().at("type"), h, 1e-12);
  EXPECT_EQ(ac.binnings().size(), 1u);
  EXPECT_THROW(ac.rank_all(), Error);
}
