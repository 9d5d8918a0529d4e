#pragma once

// Analytic focus: every interaction adds decaying importance to the concepts
// of the touched point; a point is scored by the product of the importance
// of its concepts.

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "usermodel/core.hpp"
#include "usermodel/preprocess.hpp"

namespace usermodel {

struct ActionParams {
  double initial = 1.0;      // I(0)
  double persistence = 10.0; // P
};

struct AfConfig {
  ActionParams default_action;
  std::map<std::string, ActionParams> actions;  // per-token overrides
  double epsilon = 1e-9;
  std::size_t bins = 10;

  const ActionParams& params(const std::string& action) const {
    auto it = actions.find(action);
    return it == actions.end() ? default_action : it->second;
  }
};

/// Ebbinghaus forgetting curve I(0) * exp(-elapsed / P).
inline double af_decay(const ActionParams& p, double elapsed) {
  return p.initial * std::exp(-elapsed / p.persistence);
}

class AnalyticFocus final : public Model {
 public:
  struct Interaction {
    std::size_t point;
    std::string action;
    std::int64_t t;
  };

  AnalyticFocus(const Dataset& data, AfConfig config)
      : AnalyticFocus(data, extract_concepts(data, default_binnings(data, config.bins)), std::move(config)) {}

  AnalyticFocus(const Dataset& data, ConceptMap concepts, AfConfig config)
      : data_(&data), concepts_(std::move(concepts)), config_(std::move(config)) {
    auto check = [](const ActionParams& p, const std::string& what) {
      if (!(p.initial > 0) || !(p.persistence > 0)) {
        throw Error(ErrorKind::Config, "af action '" + what + "' needs positive initial and persistence");
      }
    };
    check(config_.default_action, "default");
    for (const auto& [token, p] : config_.actions) check(p, token);
    if (!(config_.epsilon > 0)) throw Error(ErrorKind::Config, "af.epsilon must be > 0");
    by_concept_.resize(concepts_.tokens.size());
  }

  std::string name() const override { return "af"; }
  Capabilities capabilities() const override { return {true, false}; }

  void observe(const InteractionEvent& event) override {
    if (event.point >= data_->size()) throw Error(ErrorKind::UnknownPoint, event.point_id);
    if (!history_.empty() && event.t < now_) {
      throw Error(ErrorKind::NonMonotonicTime, "af observed t=" + std::to_string(event.t) +
                                                   " after t=" + std::to_string(now_));
    }
    const std::size_t h = history_.size();
    history_.push_back({event.point, event.action, event.t});
    for (auto c : concepts_.concepts[event.point]) by_concept_[c].push_back(h);
    now_ = event.t;
  }

  /// Current time: the step of the latest interaction.
  std::int64_t now() const noexcept { return now_; }

  /// Sum of decayed contributions from every interaction touching the
  /// concept up to time tau.
  double concept_importance(std::size_t concept_id, std::int64_t tau) const {
    double sum = 0.0;
    for (auto h : by_concept_.at(concept_id)) {
      const auto& it = history_[h];
      if (it.t > tau) continue;
      sum += af_decay(config_.params(it.action), static_cast<double>(tau - it.t));
    }
    return sum;
  }

  double concept_importance(const std::string& token, std::int64_t tau) const {
    for (std::size_t c = 0; c < concepts_.tokens.size(); ++c) {
      if (concepts_.tokens[c] == token) return concept_importance(c, tau);
    }
    return 0.0;
  }

  RankScores rank_at(std::int64_t tau) const {
    std::vector<double> importance(concepts_.tokens.size());
    for (std::size_t c = 0; c < importance.size(); ++c) {
      importance[c] = std::log(std::max(concept_importance(c, tau), config_.epsilon));
    }
    std::vector<double> log_score(data_->size(), 0.0);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < data_->size(); ++i) {
      for (auto c : concepts_.concepts[i]) log_score[i] += importance[c];
      top = std::max(top, log_score[i]);
    }
    // Products are formed relative to the largest one, then rescaled.
    for (auto& s : log_score) s = std::exp(s - top);
    return RankScores{rescale_unit(std::move(log_score))};
  }

  RankScores rank_all() const override { return rank_at(now_); }

  const ConceptMap& concepts() const noexcept { return concepts_; }
  const std::vector<Interaction>& history() const noexcept { return history_; }

 private:
  const Dataset* data_;
  ConceptMap concepts_;
  AfConfig config_;
  std::vector<Interaction> history_;
  std::vector<std::vector<std::size_t>> by_concept_;  // concept -> history indices
  std::int64_t now_ = 0;
};

}  // namespace usermodel
