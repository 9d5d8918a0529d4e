#pragma once

// Competing models: one exploration model per attribute subset S (2^d of
// them, including the empty "null" model). Every model predicts the next
// interacted point as
//
//   Pr(x | S) = prod_{a in S} f_a(x_a) / sum_{y in D} prod_{a in S} f_a(y_a)
//
// with f_a a Laplace-smoothed category frequency (discrete attributes) or a
// Gaussian KDE over interacted values truncated to the data range
// (continuous attributes). Normalizing over the dataset's points puts every
// model, the null model's 1/n included, on the same outcome space. The
// posterior over models is updated prequentially.

#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include "usermodel/core.hpp"

namespace usermodel {

struct CmConfig {
  double bandwidth = 0.1;  // fraction of the attribute range
  double alpha = 1.0;
  std::size_t d_cap = 16;
  bool unweighted_bma = false;
};

namespace detail {

inline double log_sum_exp(std::span<const double> v) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : v) top = std::max(top, x);
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double x : v) s += std::exp(x - top);
  return top + std::log(s);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace detail

class CompetingModels final : public Model {
 public:
  using Mask = std::uint32_t;

  CompetingModels(const Dataset& data, CmConfig config) : data_(&data), config_(config) {
    const std::size_t d = data.dims();
    if (config_.d_cap > 31) throw Error(ErrorKind::Config, "cm.d_cap must be <= 31");
    if (d > config_.d_cap) {
      throw Error(ErrorKind::TooManyAttributes,
                  "d=" + std::to_string(d) + " exceeds d_cap=" + std::to_string(config_.d_cap));
    }
    if (!(config_.bandwidth > 0) || !(config_.alpha > 0)) {
      throw Error(ErrorKind::Config, "cm.bandwidth and cm.alpha must be > 0");
    }
    stats_.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      auto& st = stats_[j];
      const auto& a = data.attribute(j);
      st.discrete = a.discrete();
      if (st.discrete) {
        st.counts.assign(a.categories.size(), 0.0);
      } else {
        st.width = config_.bandwidth * data.range(j);
        st.degenerate = !(st.width > 0);
        st.kde_sum.assign(data.size(), 0.0);
      }
    }
    log_term_.assign(d, std::vector<double>(data.size(), 0.0));
    const std::size_t models = std::size_t{1} << d;
    log_post_.assign(models, -static_cast<double>(d) * std::numbers::ln2);
    refresh();
  }

  std::string name() const override { return "cm"; }
  Capabilities capabilities() const override { return {true, true}; }

  std::size_t model_count() const noexcept { return log_post_.size(); }
  std::size_t observations() const noexcept { return observed_; }

  double posterior(Mask model) const { return std::exp(log_post_.at(model)); }
  std::vector<double> posteriors() const {
    std::vector<double> p(log_post_.size());
    for (std::size_t m = 0; m < p.size(); ++m) p[m] = std::exp(log_post_[m]);
    return p;
  }

  /// Per-attribute predictive term at a raw value: the smoothed category
  /// mass, or the truncated KDE density (uniform before any interaction).
  double attribute_term(std::size_t attribute, double value) const {
    const auto& st = stats_.at(attribute);
    if (st.discrete) {
      const double m = static_cast<double>(st.counts.size());
      return (st.counts.at(static_cast<std::size_t>(value)) + config_.alpha) /
             (static_cast<double>(observed_) + config_.alpha * m);
    }
    if (st.degenerate) return 1.0;
    if (observed_ == 0) return 1.0 / data_->range(attribute);
    double s = 0.0;
    for (double c : st.history) s += kernel(attribute, value, c);
    return s / static_cast<double>(observed_);
  }

  /// Pr(x | S) for dataset point `point`.
  double predictive(Mask model, std::size_t point) const {
    double s = 0.0;
    for (std::size_t j = 0; j < stats_.size(); ++j) {
      if (model & (Mask{1} << j)) s += log_term_[j][point];
    }
    return std::exp(s - log_norm_.at(model));
  }

  void observe(const InteractionEvent& event) override {
    if (event.point >= data_->size()) throw Error(ErrorKind::UnknownPoint, event.point_id);
    const std::size_t x = event.point;
    for (Mask m = 0; m < log_post_.size(); ++m) {
      double s = 0.0;
      for (std::size_t j = 0; j < stats_.size(); ++j) {
        if (m & (Mask{1} << j)) s += log_term_[j][x];
      }
      log_post_[m] += s - log_norm_[m];
    }
    const double z = detail::log_sum_exp(log_post_);
    for (auto& lp : log_post_) lp -= z;

    ++observed_;
    for (std::size_t j = 0; j < stats_.size(); ++j) {
      auto& st = stats_[j];
      const double v = data_->value(x, j);
      if (st.discrete) {
        st.counts[static_cast<std::size_t>(v)] += 1.0;
      } else if (!st.degenerate) {
        st.history.push_back(v);
        for (std::size_t i = 0; i < data_->size(); ++i) st.kde_sum[i] += kernel(j, data_->value(i, j), v);
      }
    }
    refresh();
  }

  /// Bayesian model average of the predictive distributions, before rescaling.
  std::vector<double> average_predictive() const {
    std::vector<double> score(data_->size(), 0.0);
    for_each_model([&](Mask m, std::span<const double> log_unnorm) {
      const double w = config_.unweighted_bma ? 0.0 : log_post_[m];
      const double off = w - log_norm_[m];
      for (std::size_t i = 0; i < score.size(); ++i) score[i] += std::exp(log_unnorm[i] + off);
    });
    return score;
  }

  RankScores rank_all() const override { return RankScores{rescale_unit(average_predictive())}; }

  /// Posterior mass of the models that contain each attribute.
  BiasScores bias_all() const override {
    BiasScores b{attribute_names(*data_), std::vector<double>(stats_.size(), 0.0)};
    for (Mask m = 0; m < log_post_.size(); ++m) {
      const double p = std::exp(log_post_[m]);
      for (std::size_t j = 0; j < stats_.size(); ++j) {
        if (m & (Mask{1} << j)) b.values[j] += p;
      }
    }
    for (auto& v : b.values) v = std::clamp(v, 0.0, 1.0);
    return b;
  }

 private:
  struct AttributeStats {
    bool discrete = false;
    bool degenerate = false;
    double width = 0.0;
    std::vector<double> counts;   // discrete
    std::vector<double> history;  // continuous, interacted values
    std::vector<double> kde_sum;  // continuous, per dataset point
  };

  double kernel(std::size_t attribute, double v, double center) const {
    const double w = stats_[attribute].width;
    const double lo = data_->min(attribute), hi = data_->max(attribute);
    const double mass = detail::normal_cdf((hi - center) / w) - detail::normal_cdf((lo - center) / w);
    const double z = (v - center) / w;
    return std::exp(-0.5 * z * z) / (w * std::sqrt(2.0 * std::numbers::pi) * mass);
  }

  /// Recomputes per-point log terms and per-model log normalizers.
  void refresh() {
    const std::size_t n = data_->size();
    for (std::size_t j = 0; j < stats_.size(); ++j) {
      const auto& st = stats_[j];
      auto& lt = log_term_[j];
      if (observed_ == 0 || (!st.discrete && st.degenerate)) {
        std::fill(lt.begin(), lt.end(), 0.0);
      } else if (st.discrete) {
        for (std::size_t i = 0; i < n; ++i) lt[i] = std::log(attribute_term(j, data_->value(i, j)));
      } else {
        for (std::size_t i = 0; i < n; ++i) lt[i] = std::log(st.kde_sum[i] / static_cast<double>(observed_));
      }
    }
    log_norm_.assign(log_post_.size(), 0.0);
    for_each_model([&](Mask m, std::span<const double> log_unnorm) {
      log_norm_[m] = detail::log_sum_exp(log_unnorm);
    });
  }

  /// Visits every subset with its per-point unnormalized log score, sharing
  /// partial sums along a depth-first walk (O(2^d n) overall).
  template <class Visit>
  void for_each_model(Visit&& visit) const {
    const std::size_t d = stats_.size();
    std::vector<std::vector<double>> level(d + 1, std::vector<double>(data_->size(), 0.0));
    walk(0, 0, level, visit);
  }

  template <class Visit>
  void walk(std::size_t j, Mask mask, std::vector<std::vector<double>>& level, Visit& visit) const {
    const std::size_t d = stats_.size();
    if (j == d) {
      visit(mask, std::span<const double>(level[d]));
      return;
    }
    level[j + 1] = level[j];
    walk(j + 1, mask, level, visit);
    const auto& lt = log_term_[j];
    for (std::size_t i = 0; i < lt.size(); ++i) level[j + 1][i] = level[j][i] + lt[i];
    walk(j + 1, mask | (Mask{1} << j), level, visit);
  }

  const Dataset* data_;
  CmConfig config_;
  std::vector<AttributeStats> stats_;
  std::vector<std::vector<double>> log_term_;  // [attribute][point] log f_a(x_a)
  std::vector<double> log_post_;
  std::vector<double> log_norm_;
  std::size_t observed_ = 0;
};

}  // namespace usermodel
