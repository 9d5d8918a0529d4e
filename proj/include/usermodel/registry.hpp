#pragma once

// Builds models by name from a Config. Expensive per-dataset preprocessing
// (the k-NN matrix) is cached in a ModelContext shared by all instances.

#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "usermodel/analytic_focus.hpp"
#include "usermodel/bias_metrics.hpp"
#include "usermodel/competing_models.hpp"
#include "usermodel/config.hpp"
#include "usermodel/core.hpp"
#include "usermodel/ensemble.hpp"
#include "usermodel/hmm.hpp"
#include "usermodel/knn.hpp"
#include "usermodel/naive_bayes.hpp"

namespace usermodel {

inline const std::vector<std::string> kModelNames{"knn", "bnb", "af", "hmm", "cm", "ad", "ac", "ens"};
inline const std::vector<std::string> kDefaultPredictors{"knn", "bnb", "af", "hmm", "cm"};
inline const std::vector<std::string> kDefaultDetectors{"hmm", "cm", "ad", "ac"};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for the `stream`-th replay derived from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

inline void check_config_keys(const Config& config) {
  static const std::set<std::string> known{
      "seed",         "knn.k",          "knn.alpha",          "bnb.rounds",       "bnb.negative_ratio",
      "bnb.alpha",    "bnb.seed",       "bnb.bins",           "af.epsilon",       "af.bins",
      "af.initial",   "af.persistence", "hmm.particles",      "hmm.transition_scale",
      "hmm.stickiness", "hmm.bandwidth", "hmm.category_smoothing", "hmm.ess_threshold",
      "hmm.roughening", "hmm.seed",     "cm.bandwidth",       "cm.alpha",         "cm.d_cap",
      "cm.unweighted_bma", "ac.bins",   "ensemble.members",   "ensemble.bias_members"};
  for (const auto& [key, _] : config.values()) {
    if (known.contains(key)) continue;
    if (key.rfind("af.actions.", 0) == 0) {
      const auto tail = key.substr(key.rfind('.') + 1);
      if (tail == "initial" || tail == "persistence") continue;
    }
    throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
  }
}

class ModelContext {
 public:
  ModelContext(const Dataset& data, Config config) : data_(&data), config_(std::move(config)) {
    check_config_keys(config_);
  }

  const Dataset& data() const noexcept { return *data_; }
  const Config& config() const noexcept { return config_; }

  std::shared_ptr<const NeighborMatrix> neighbors() const {
    std::call_once(knn_once_, [&] {
      knn_ = std::make_shared<const NeighborMatrix>(
          build_neighbor_matrix(*data_, config_.get<std::size_t>("knn.k", KnnConfig{}.k)));
    });
    return knn_;
  }

  /// `stream` distinguishes replays (e.g. the session index) so that every
  /// (model, session) pair gets its own reproducible random stream.
  std::unique_ptr<Model> make(const std::string& name, std::uint64_t stream = 0) const {
    const auto& c = config_;
    const auto run_seed = c.get<std::uint64_t>("seed", 0);
    if (name == "knn") {
      return std::make_unique<KnnModel>(*data_, neighbors(), c.get("knn.alpha", KnnConfig{}.alpha));
    }
    if (name == "bnb") {
      BnbConfig b;
      b.rounds = c.get("bnb.rounds", b.rounds);
      b.negative_ratio = c.get("bnb.negative_ratio", b.negative_ratio);
      b.alpha = c.get("bnb.alpha", b.alpha);
      b.bins = c.get("bnb.bins", b.bins);
      b.seed = derive_seed(c.get<std::uint64_t>("bnb.seed", run_seed), stream);
      return std::make_unique<BoostedNaiveBayes>(*data_, b);
    }
    if (name == "af") {
      AfConfig a;
      a.default_action.initial = c.get("af.initial", a.default_action.initial);
      a.default_action.persistence = c.get("af.persistence", a.default_action.persistence);
      a.epsilon = c.get("af.epsilon", a.epsilon);
      a.bins = c.get("af.bins", a.bins);
      for (const auto& [key, value] : c.under("af.actions")) {
        const auto dot = key.find('.');
        auto& p = a.actions.try_emplace(key.substr(0, dot), a.default_action).first->second;
        (key.substr(dot + 1) == "initial" ? p.initial : p.persistence) = value.get<double>();
      }
      return std::make_unique<AnalyticFocus>(*data_, a);
    }
    if (name == "hmm") {
      HmmConfig h;
      h.particles = c.get("hmm.particles", h.particles);
      h.transition_scale = c.get("hmm.transition_scale", h.transition_scale);
      h.stickiness = c.get("hmm.stickiness", h.stickiness);
      h.bandwidth = c.get("hmm.bandwidth", h.bandwidth);
      h.category_smoothing = c.get("hmm.category_smoothing", h.category_smoothing);
      h.ess_threshold = c.get("hmm.ess_threshold", h.ess_threshold);
      h.roughening = c.get("hmm.roughening", h.roughening);
      h.seed = derive_seed(c.get<std::uint64_t>("hmm.seed", run_seed), stream);
      return std::make_unique<HiddenMarkovModel>(*data_, h);
    }
    if (name == "cm") {
      CmConfig m;
      m.bandwidth = c.get("cm.bandwidth", m.bandwidth);
      m.alpha = c.get("cm.alpha", m.alpha);
      m.d_cap = c.get("cm.d_cap", m.d_cap);
      m.unweighted_bma = c.get("cm.unweighted_bma", m.unweighted_bma);
      return std::make_unique<CompetingModels>(*data_, m);
    }
    if (name == "ad") return std::make_unique<AttributeDistributionModel>(*data_);
    if (name == "ac") return std::make_unique<AdaptiveContextualization>(*data_, c.get<std::size_t>("ac.bins", 10));
    if (name == "ens") {
      const auto predictors = c.get("ensemble.members", kDefaultPredictors);
      const auto detectors = c.get("ensemble.bias_members", kDefaultDetectors);
      std::vector<std::string> names;
      for (const auto& list : {predictors, detectors}) {
        for (const auto& n : list) {
          if (n == "ens") throw Error(ErrorKind::Config, "an ensemble cannot contain itself");
          if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
        }
      }
      std::vector<std::unique_ptr<Model>> members;
      for (const auto& n : names) members.push_back(make(n, stream));
      return std::make_unique<Ensemble>(std::move(members), predictors, detectors);
    }
    throw Error(ErrorKind::Config, "unknown model '" + name + "'");
  }

 private:
  const Dataset* data_;
  Config config_;
  mutable std::once_flag knn_once_;
  mutable std::shared_ptr<const NeighborMatrix> knn_;
};

}  // namespace usermodel
