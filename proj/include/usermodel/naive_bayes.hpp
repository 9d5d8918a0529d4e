#pragma once

// Boosted naive Bayes relevance predictor. Interacted points are positive
// examples; negatives are drawn uniformly from the points not interacted
// with. A SAMME loop (two classes) boosts weighted, Laplace-smoothed naive
// Bayes learners, and points are ranked by the learner-weighted sum of
// log-odds.

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "usermodel/core.hpp"
#include "usermodel/preprocess.hpp"

namespace usermodel {

struct BnbConfig {
  std::size_t rounds = 10;
  double negative_ratio = 1.0;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  std::size_t bins = 10;
};

/// One naive Bayes learner over discretized attributes, in log space.
struct NaiveBayesLearner {
  double log_prior_pos = 0.0;
  double log_prior_neg = 0.0;
  // [attribute][code] log Pr(value | y)
  std::vector<std::vector<double>> log_cond_pos;
  std::vector<std::vector<double>> log_cond_neg;

  double log_odds(const Discretized& disc, std::size_t point) const {
    double s = log_prior_pos - log_prior_neg;
    for (std::size_t j = 0; j < log_cond_pos.size(); ++j) {
      const auto c = disc.code(point, j);
      s += log_cond_pos[j][c] - log_cond_neg[j][c];
    }
    return s;
  }

  /// Exact posterior Pr(y=1 | x) for the learner.
  double posterior(const Discretized& disc, std::size_t point) const {
    return 1.0 / (1.0 + std::exp(-log_odds(disc, point)));
  }
};

struct WeightedLearner {
  NaiveBayesLearner learner;
  double weight = 1.0;
};

namespace detail {

/// Fits a naive Bayes learner to weighted examples. Weighted counts are
/// scaled by the example count so that alpha acts as a pseudo-count.
inline NaiveBayesLearner fit_naive_bayes(const Discretized& disc, std::span<const std::size_t> points,
                                         std::span<const int> labels, std::span<const double> weights,
                                         double alpha) {
  const std::size_t d = disc.cardinality.size();
  const double scale = static_cast<double>(points.size());
  double class_w[2] = {0.0, 0.0};
  std::vector<std::vector<double>> counts[2];
  for (int y = 0; y < 2; ++y) {
    counts[y].resize(d);
    for (std::size_t j = 0; j < d; ++j) counts[y][j].assign(disc.cardinality[j], 0.0);
  }
  for (std::size_t e = 0; e < points.size(); ++e) {
    const int y = labels[e];
    class_w[y] += weights[e];
    for (std::size_t j = 0; j < d; ++j) counts[y][j][disc.code(points[e], j)] += weights[e] * scale;
  }
  const double total = class_w[0] + class_w[1];
  NaiveBayesLearner nb;
  nb.log_prior_pos = std::log(class_w[1] / total);
  nb.log_prior_neg = std::log(class_w[0] / total);
  for (int y = 0; y < 2; ++y) {
    auto& out = y == 1 ? nb.log_cond_pos : nb.log_cond_neg;
    out.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double m = static_cast<double>(disc.cardinality[j]);
      const double denom = class_w[y] * scale + alpha * m;
      out[j].resize(disc.cardinality[j]);
      for (std::size_t v = 0; v < disc.cardinality[j]; ++v) {
        out[j][v] = std::log((counts[y][j][v] + alpha) / denom);
      }
    }
  }
  return nb;
}

}  // namespace detail

class BoostedNaiveBayes final : public Model {
 public:
  BoostedNaiveBayes(const Dataset& data, BnbConfig config)
      : data_(&data), config_(config), disc_(discretize(data, default_binnings(data, config.bins))) {
    if (config_.rounds < 1) throw Error(ErrorKind::Config, "bnb.rounds must be >= 1");
    if (!(config_.negative_ratio > 0)) throw Error(ErrorKind::Config, "bnb.negative_ratio must be > 0");
    if (!(config_.alpha > 0)) throw Error(ErrorKind::Config, "bnb.alpha must be > 0");
  }

  std::string name() const override { return "bnb"; }
  Capabilities capabilities() const override { return {true, false}; }

  void observe(const InteractionEvent& event) override {
    if (event.point >= data_->size()) throw Error(ErrorKind::UnknownPoint, event.point_id);
    ++positives_[event.point];
    ++positive_total_;
    ensemble_.reset();
  }

  /// Samples negatives and runs the boosting rounds. Deterministic given the
  /// seed and the multiset of positives.
  void fit() { ensemble_ = build_ensemble(); }

  bool fitted() const noexcept { return ensemble_.has_value(); }

  /// Learner-weighted log-odds margin, min-max rescaled. Throws NotFitted
  /// when observations arrived since the last fit().
  RankScores rank() const {
    if (!ensemble_) throw Error(ErrorKind::NotFitted, "bnb ensemble is stale or was never fitted");
    std::vector<double> margin(data_->size(), 0.0);
    for (std::size_t i = 0; i < data_->size(); ++i) {
      for (const auto& wl : *ensemble_) margin[i] += wl.weight * wl.learner.log_odds(disc_, i);
    }
    return RankScores{rescale_unit(std::move(margin))};
  }

  /// Refits lazily when stale; the refit depends only on the seed and the
  /// positives, so this stays a pure query.
  RankScores rank_all() const override {
    if (!ensemble_) ensemble_ = build_ensemble();
    return rank();
  }

  const std::vector<WeightedLearner>& learners() const {
    if (!ensemble_) throw Error(ErrorKind::NotFitted, "bnb ensemble is stale or was never fitted");
    return *ensemble_;
  }
  const std::map<std::size_t, std::size_t>& positives() const noexcept { return positives_; }
  std::size_t positive_count() const noexcept { return positive_total_; }
  const Discretized& discretized() const noexcept { return disc_; }

 private:
  std::vector<WeightedLearner> build_ensemble() const {
    if (positive_total_ == 0) throw Error(ErrorKind::NotObserved, "bnb needs at least one positive");
    std::vector<std::size_t> unlabeled;
    for (std::size_t i = 0; i < data_->size(); ++i) {
      if (!positives_.contains(i)) unlabeled.push_back(i);
    }
    if (unlabeled.empty()) throw Error(ErrorKind::AllPointsPositive, "no points left to sample negatives from");

    std::vector<std::size_t> points;
    std::vector<int> labels;
    for (const auto& [p, count] : positives_) {
      for (std::size_t c = 0; c < count; ++c) {
        points.push_back(p);
        labels.push_back(1);
      }
    }
    const auto wanted = static_cast<std::size_t>(
        std::ceil(config_.negative_ratio * static_cast<double>(positive_total_)));
    const std::size_t neg = std::min(wanted, unlabeled.size());
    std::mt19937_64 rng(config_.seed);
    for (std::size_t s = 0; s < neg; ++s) {
      std::uniform_int_distribution<std::size_t> pick(s, unlabeled.size() - 1);
      std::swap(unlabeled[s], unlabeled[pick(rng)]);
      points.push_back(unlabeled[s]);
      labels.push_back(0);
    }

    const std::size_t m = points.size();
    std::vector<double> w(m, 1.0 / static_cast<double>(m));
    std::vector<WeightedLearner> learners;
    for (std::size_t round = 0; round < config_.rounds; ++round) {
      auto nb = detail::fit_naive_bayes(disc_, points, labels, w, config_.alpha);
      std::vector<unsigned char> miss(m);
      double err = 0.0, total = 0.0;
      for (std::size_t e = 0; e < m; ++e) {
        const int predicted = nb.log_odds(disc_, points[e]) > 0.0 ? 1 : 0;
        miss[e] = predicted != labels[e];
        err += miss[e] ? w[e] : 0.0;
        total += w[e];
      }
      err /= total;
      // Two-class SAMME: a learner no better than chance ends boosting; the
      // first learner is kept regardless so the ensemble is never empty.
      if (err >= 0.5) {
        if (learners.empty()) learners.push_back({std::move(nb), 1.0});
        break;
      }
      if (err <= 0.0) {
        constexpr double kFloor = 1e-10;
        learners.push_back({std::move(nb), std::log((1.0 - kFloor) / kFloor)});
        break;
      }
      const double a = std::log((1.0 - err) / err);
      learners.push_back({std::move(nb), a});
      double norm = 0.0;
      for (std::size_t e = 0; e < m; ++e) {
        if (miss[e]) w[e] *= std::exp(a);
        norm += w[e];
      }
      for (auto& x : w) x /= norm;
    }
    return learners;
  }

  const Dataset* data_;
  BnbConfig config_;
  Discretized disc_;
  std::map<std::size_t, std::size_t> positives_;
  std::size_t positive_total_ = 0;
  mutable std::optional<std::vector<WeightedLearner>> ensemble_;
};

}  // namespace usermodel
