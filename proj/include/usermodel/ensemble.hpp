#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "usermodel/core.hpp"

namespace usermodel {

namespace detail {

template <class Query>
auto member_ready(const Model& m, Query&& query) {
  try {
    return query();
  } catch (const Error& e) {
    throw Error(ErrorKind::MemberNotReady, "ensemble member '" + m.name() + "': " + e.what());
  }
}

}  // namespace detail

/// Unweighted average of member rankings and member bias scores. Every
/// member sees every event once, in registration order.
class Ensemble final : public Model {
 public:
  Ensemble(std::vector<std::unique_ptr<Model>> members, const std::vector<std::string>& predictors,
           const std::vector<std::string>& detectors)
      : members_(std::move(members)) {
    if (members_.empty()) throw Error(ErrorKind::Config, "ensemble has no members");
    for (const auto& m : members_) {
      if (!m) throw Error(ErrorKind::Config, "ensemble member is null");
    }
    for (const auto& name : predictors) predictors_.push_back(&member(name, true));
    for (const auto& name : detectors) detectors_.push_back(&member(name, false));
    if (predictors_.empty() && detectors_.empty()) {
      throw Error(ErrorKind::Config, "ensemble has neither predictors nor bias detectors");
    }
  }

  std::string name() const override { return "ens"; }
  Capabilities capabilities() const override { return {!predictors_.empty(), !detectors_.empty()}; }

  void observe(const InteractionEvent& event) override {
    for (auto& m : members_) {
      try {
        m->observe(event);
      } catch (const Error& e) {
        throw Error(e.kind(), "ensemble member '" + m->name() + "': " + e.what());
      } catch (const std::exception& e) {
        throw Error(ErrorKind::InvalidArgument, "ensemble member '" + m->name() + "': " + e.what());
      }
    }
  }

  RankScores rank_all() const override {
    if (predictors_.empty()) return Model::rank_all();
    RankScores out;
    for (const Model* m : predictors_) {
      const auto r = detail::member_ready(*m, [&] { return m->rank_all(); });
      if (out.values.empty()) out.values.assign(r.values.size(), 0.0);
      for (std::size_t i = 0; i < r.values.size(); ++i) out.values[i] += r.values[i];
    }
    const double k = static_cast<double>(predictors_.size());
    for (auto& v : out.values) v /= k;
    return out;
  }

  BiasScores bias_all() const override {
    if (detectors_.empty()) return Model::bias_all();
    BiasScores out;
    for (const Model* m : detectors_) {
      auto b = detail::member_ready(*m, [&] { return m->bias_all(); });
      if (out.names.empty()) {
        out.names = b.names;
        out.values.assign(b.values.size(), 0.0);
      } else if (b.names != out.names) {
        throw Error(ErrorKind::Config, "ensemble member '" + m->name() + "' reports different attributes");
      }
      for (std::size_t i = 0; i < b.values.size(); ++i) out.values[i] += b.values[i];
    }
    const double k = static_cast<double>(detectors_.size());
    for (auto& v : out.values) v /= k;
    return out;
  }

  bool assumptions_ok() const override {
    return std::all_of(detectors_.begin(), detectors_.end(), [](const Model* m) { return m->assumptions_ok(); });
  }

  const std::vector<std::unique_ptr<Model>>& members() const noexcept { return members_; }

 private:
  Model& member(const std::string& name, bool predicting) {
    for (auto& m : members_) {
      if (m->name() != name) continue;
      const auto caps = m->capabilities();
      if (predicting ? !caps.predicts : !caps.detects_bias) {
        throw Error(ErrorKind::Config, "member '" + name + (predicting ? "' does not predict" : "' does not detect bias"));
      }
      return *m;
    }
    throw Error(ErrorKind::Config, "ensemble roster names unknown member '" + name + "'");
  }

  std::vector<std::unique_ptr<Model>> members_;
  std::vector<const Model*> predictors_;
  std::vector<const Model*> detectors_;
};

}  // namespace usermodel
