#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "support.hpp"

using namespace usermodel;
using namespace testing_support;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an exception";
  return ErrorKind::Io;
}

}  // namespace

TEST(Schema, RejectsMalformedAttributes) {
  EXPECT_EQ(kind_of([] { check_schema(std::vector<AttributeSchema>{}); }), ErrorKind::InvalidSchema);
  EXPECT_EQ(kind_of([] { check_schema(std::vector{continuous("a"), continuous("a")}); }), ErrorKind::InvalidSchema);
  EXPECT_EQ(kind_of([] { check_schema(std::vector{categorical("c", {})}); }), ErrorKind::InvalidSchema);
  EXPECT_EQ(kind_of([] { check_schema(std::vector{categorical("c", {"x", "x"})}); }), ErrorKind::InvalidSchema);
  EXPECT_EQ(kind_of([] { check_schema(std::vector{AttributeSchema{"c", AttributeKind::continuous, {"x"}, true}}); }),
            ErrorKind::InvalidSchema);
  EXPECT_EQ(kind_of([] { check_schema(std::vector{continuous("point_id")}); }), ErrorKind::InvalidSchema);
  EXPECT_NO_THROW(check_schema(std::vector{continuous("a"), ordinal("o", {"lo", "hi"})}));
}

TEST(Schema, ParsesKinds) {
  EXPECT_EQ(parse_attribute_kind("ordinal"), AttributeKind::ordinal);
  EXPECT_EQ(to_string(AttributeKind::categorical), "categorical");
  EXPECT_THROW(parse_attribute_kind("nominal"), Error);
}

TEST(DatasetTest, ThreeRowsTwoAttributes) {
  auto d = make_dataset({continuous("x"), categorical("c", {"u", "v"})}, {{0.5, 0}, {1.5, 1}, {-2, 1}});
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.dims(), 2u);
  EXPECT_EQ(d.category(1, 1), 1u);
  EXPECT_DOUBLE_EQ(d.min(0), -2);
  EXPECT_DOUBLE_EQ(d.max(0), 1.5);
  EXPECT_DOUBLE_EQ(d.range(0), 3.5);
  EXPECT_DOUBLE_EQ(d.range(1), 1.0);
  EXPECT_EQ(d.format_value(2, 1), "v");
  EXPECT_EQ(*d.find("p2"), 1u);
  EXPECT_FALSE(d.find("p9"));
  EXPECT_EQ(*d.attribute_index("c"), 1u);
}

TEST(DatasetTest, InvariantViolations) {
  EXPECT_EQ(kind_of([] { make_dataset({continuous("x")}, {{1}, {2}}, {"p7", "p7"}); }), ErrorKind::DuplicateId);
  EXPECT_EQ(kind_of([] { make_dataset({continuous("x")}, {{NAN}}); }), ErrorKind::NonFiniteValue);
  EXPECT_EQ(kind_of([] { make_dataset({continuous("x")}, {{INFINITY}}); }), ErrorKind::NonFiniteValue);
  EXPECT_EQ(kind_of([] { make_dataset({categorical("c", {"a"})}, {{1}}); }), ErrorKind::UnknownCategory);
  EXPECT_EQ(kind_of([] { make_dataset({continuous("x")}, {}); }), ErrorKind::InvalidArgument);
}

TEST(DatasetTest, IdRankIsLexical) {
  auto d = make_dataset({continuous("x")}, {{0}, {0}, {0}}, {"b", "c", "a"});
  EXPECT_EQ(d.id_rank(0), 1u);
  EXPECT_EQ(d.id_rank(1), 2u);
  EXPECT_EQ(d.id_rank(2), 0u);
}

TEST(Ordering, MapExamples) {
  EXPECT_EQ(to_ordering(std::map<std::string, double>{{"a", 0.9}, {"b", 0.1}, {"c", 0.5}}),
            (std::vector<std::string>{"a", "c", "b"}));
  EXPECT_EQ(to_ordering(std::map<std::string, double>{{"a", 0.5}, {"b", 0.5}}), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(to_ordering(std::map<std::string, double>{{"d", 0.3}, {"b", 0.3}, {"a", 0.3}, {"c", 0.3}}),
            (std::vector<std::string>{"a", "b", "c", "d"}));
}

TEST(Ordering, DatasetTieRuleUsesIdNotRowOrder) {
  auto d = make_dataset({continuous("x")}, {{0}, {0}, {0}, {0}}, {"d", "b", "a", "c"});
  RankScores r{{0.3, 0.3, 0.3, 0.3}};
  EXPECT_EQ(to_ordering(r, d), (std::vector<std::size_t>{2, 1, 3, 0}));
}

TEST(Ordering, PermutationAndMonotoneInvariance) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto d = random_dataset(40, 1, 100 + trial);
    RankScores r;
    for (std::size_t i = 0; i < d.size(); ++i) r.values.push_back(static_cast<double>(rng() % 7) / 6.0);
    auto order = to_ordering(r, d);
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) ASSERT_EQ(sorted[i], i);

    RankScores warped;
    for (double v : r.values) warped.values.push_back(std::exp(3 * v) - 7);
    EXPECT_EQ(to_ordering(warped, d), order);

    for (std::size_t pos = 0; pos < order.size(); ++pos) ASSERT_EQ(rank_of(r, d, order[pos]), pos + 1);
  }
}

TEST(Rescale, UnitRangeAndConstantCase) {
  EXPECT_EQ(rescale_unit({2, 4, 3}), (std::vector<double>{0, 1, 0.5}));
  EXPECT_EQ(rescale_unit({7, 7}), (std::vector<double>{0.5, 0.5}));
  EXPECT_TRUE(rescale_unit({}).empty());
}

TEST(BiasScoresTest, LookupByName) {
  BiasScores b{{"x", "y"}, {0.1, 0.9}};
  EXPECT_DOUBLE_EQ(b.at("y"), 0.9);
  EXPECT_EQ(kind_of([&] { b.at("z"); }), ErrorKind::UnknownAttribute);
}

TEST(ErrorTest, MessageCarriesKind) {
  Error e(ErrorKind::UnknownPoint, "p3");
  EXPECT_EQ(e.kind(), ErrorKind::UnknownPoint);
  EXPECT_NE(std::string(e.what()).find("p3"), std::string::npos);
}
