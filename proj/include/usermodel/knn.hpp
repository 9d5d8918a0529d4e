#pragma once

#include <memory>
#include <vector>

#include "usermodel/core.hpp"
#include "usermodel/preprocess.hpp"

namespace usermodel {

struct KnnConfig {
  std::size_t k = 20;
  double alpha = 1.0;  // Laplace smoothing
};

/// k-nearest-neighbor relevance: every point carries a binary "interacted"
/// label and is scored by the smoothed fraction of positive neighbors,
/// (pos_k + alpha) / (k + 2 alpha).
class KnnModel final : public Model {
 public:
  KnnModel(const Dataset& data, KnnConfig config)
      : KnnModel(data, std::make_shared<const NeighborMatrix>(build_neighbor_matrix(data, config.k)),
                 config.alpha) {}

  /// Shares a precomputed neighbor matrix between instances.
  KnnModel(const Dataset& data, std::shared_ptr<const NeighborMatrix> neighbors, double alpha)
      : data_(&data), neighbors_(std::move(neighbors)), alpha_(alpha), labels_(data.size(), 0) {
    if (!(alpha_ > 0)) throw Error(ErrorKind::Config, "knn.alpha must be > 0");
    if (neighbors_->neighbors.size() != data.size()) {
      throw Error(ErrorKind::InvalidArgument, "neighbor matrix does not match dataset");
    }
  }

  std::string name() const override { return "knn"; }
  Capabilities capabilities() const override { return {true, false}; }

  void observe(const InteractionEvent& event) override { labels_.at(event.point) = 1; }

  RankScores rank_all() const override {
    const double k = static_cast<double>(neighbors_->k);
    RankScores r;
    r.values.resize(data_->size());
    for (std::size_t i = 0; i < data_->size(); ++i) {
      std::size_t pos = 0;
      for (const auto& nb : neighbors_->neighbors[i]) pos += labels_[nb.point];
      r.values[i] = (static_cast<double>(pos) + alpha_) / (k + 2.0 * alpha_);
    }
    return r;
  }

  const std::vector<unsigned char>& labels() const noexcept { return labels_; }
  std::size_t k() const noexcept { return neighbors_->k; }

 private:
  const Dataset* data_;
  std::shared_ptr<const NeighborMatrix> neighbors_;
  double alpha_;
  std::vector<unsigned char> labels_;
};

}  // namespace usermodel
