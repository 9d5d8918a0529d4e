#pragma once

// Distribution-comparison bias detectors. Attribute Distribution scores an
// attribute as 1 - p of a chi-square (discrete) or KS (continuous) test of
// the interacted values against the dataset; Adaptive Contextualization uses
// the Hellinger distance between the binned distributions.

#include <cmath>
#include <string>
#include <vector>

#include "usermodel/core.hpp"
#include "usermodel/preprocess.hpp"
#include "usermodel/stats.hpp"

namespace usermodel {

struct DiscreteDistributionPair {
  std::vector<double> p;  // underlying data
  std::vector<double> q;  // interactions
};

/// Proportions of each code of `attribute` in the dataset (p) and in the
/// interaction history (q).
inline DiscreteDistributionPair distribution_pair(const Dataset& data, const Discretized& disc,
                                                  std::span<const std::size_t> history, std::size_t attribute) {
  if (history.empty()) throw Error(ErrorKind::EmptyHistory, "no interactions to compare");
  const std::size_t m = disc.cardinality.at(attribute);
  DiscreteDistributionPair pair{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  for (std::size_t i = 0; i < data.size(); ++i) pair.p[disc.code(i, attribute)] += 1.0;
  for (auto h : history) pair.q[disc.code(h, attribute)] += 1.0;
  for (auto& v : pair.p) v /= static_cast<double>(data.size());
  for (auto& v : pair.q) v /= static_cast<double>(history.size());
  return pair;
}

/// sqrt(1/2 * sum_j (sqrt p_j - sqrt q_j)^2), in [0,1].
inline double hellinger_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorKind::InvalidArgument, "distributions differ in support size");
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double diff = std::sqrt(p[j]) - std::sqrt(q[j]);
    s += diff * diff;
  }
  return std::clamp(std::sqrt(0.5 * s), 0.0, 1.0);
}

inline double hellinger_bias(const Dataset& data, std::span<const std::size_t> history, std::size_t attribute,
                             const std::vector<BinningSpec>& bins) {
  const auto disc = discretize(data, bins);
  const auto pair = distribution_pair(data, disc, history, attribute);
  return hellinger_distance(pair.p, pair.q);
}

struct AttributeBias {
  double value = 0.0;
  TwoSampleResult test;
};

inline AttributeBias attribute_distribution_bias(const Dataset& data, std::span<const std::size_t> history,
                                                 std::size_t attribute) {
  if (history.empty()) throw Error(ErrorKind::EmptyHistory, "no interactions to compare");
  const auto& a = data.attribute(attribute);
  AttributeBias out;
  if (a.discrete()) {
    const std::size_t m = a.categories.size();
    std::vector<double> observed(m, 0.0), proportions(m, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) proportions[data.category(i, attribute)] += 1.0;
    for (auto h : history) observed[data.category(h, attribute)] += 1.0;
    for (auto& p : proportions) p /= static_cast<double>(data.size());
    if (m < 2) {
      out.test = TwoSampleResult{};
    } else {
      out.test = chi_square_gof(observed, proportions);
    }
  } else {
    std::vector<double> interacted, all;
    interacted.reserve(history.size());
    all.reserve(data.size());
    for (auto h : history) interacted.push_back(data.value(h, attribute));
    for (std::size_t i = 0; i < data.size(); ++i) all.push_back(data.value(i, attribute));
    out.test = ks_two_sample(interacted, all);
  }
  out.value = std::clamp(1.0 - out.test.p_value, 0.0, 1.0);
  return out;
}

class AttributeDistributionModel final : public Model {
 public:
  explicit AttributeDistributionModel(const Dataset& data) : data_(&data) {}

  std::string name() const override { return "ad"; }
  Capabilities capabilities() const override { return {false, true}; }

  void observe(const InteractionEvent& event) override {
    if (event.point >= data_->size()) throw Error(ErrorKind::UnknownPoint, event.point_id);
    history_.push_back(event.point);
  }

  std::vector<AttributeBias> details() const {
    std::vector<AttributeBias> out;
    for (std::size_t j = 0; j < data_->dims(); ++j) out.push_back(attribute_distribution_bias(*data_, history_, j));
    return out;
  }

  BiasScores bias_all() const override {
    BiasScores b{attribute_names(*data_), {}};
    for (const auto& d : details()) b.values.push_back(d.value);
    return b;
  }

  /// False when any chi-square on the current history violates the
  /// expected-count rule.
  bool assumptions_ok() const override {
    if (history_.empty()) return true;
    for (const auto& d : details()) {
      if (!d.test.assumption_ok) return false;
    }
    return true;
  }

  const std::vector<std::size_t>& history() const noexcept { return history_; }

 private:
  const Dataset* data_;
  std::vector<std::size_t> history_;
};

class AdaptiveContextualization final : public Model {
 public:
  AdaptiveContextualization(const Dataset& data, std::size_t bins)
      : data_(&data), bins_(default_binnings(data, bins)), disc_(discretize(data, bins_)) {}

  std::string name() const override { return "ac"; }
  Capabilities capabilities() const override { return {false, true}; }

  void observe(const InteractionEvent& event) override {
    if (event.point >= data_->size()) throw Error(ErrorKind::UnknownPoint, event.point_id);
    history_.push_back(event.point);
  }

  BiasScores bias_all() const override {
    BiasScores b{attribute_names(*data_), {}};
    for (std::size_t j = 0; j < data_->dims(); ++j) {
      const auto pair = distribution_pair(*data_, disc_, history_, j);
      b.values.push_back(hellinger_distance(pair.p, pair.q));
    }
    return b;
  }

  const std::vector<BinningSpec>& binnings() const noexcept { return bins_; }

 private:
  const Dataset* data_;
  std::vector<BinningSpec> bins_;
  Discretized disc_;
  std::vector<std::size_t> history_;
};

}  // namespace usermodel
