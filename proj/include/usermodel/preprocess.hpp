#pragma once

// Shared preprocessing: equal-width discretization, Gower distance, the
// k-nearest-neighbor matrix and attribute-value concepts.

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "usermodel/core.hpp"

namespace usermodel {

struct BinningSpec {
  std::string attribute;
  std::size_t bin_count = 0;
  std::vector<double> edges;  // bin_count - 1 ascending cut points

  /// Values below the first edge land in bin 0, values at or above the last
  /// edge in the last bin; a value equal to an edge belongs to the upper bin.
  std::size_t bin_of(double v) const noexcept {
    return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
  }
};

inline BinningSpec equal_width_bins(const Dataset& data, std::size_t attribute, std::size_t bin_count) {
  const auto& a = data.attribute(attribute);
  if (a.discrete()) {
    throw Error(ErrorKind::InvalidArgument, "attribute '" + a.name + "' is not continuous");
  }
  if (bin_count < 2) throw Error(ErrorKind::InvalidArgument, "bin_count must be >= 2");
  const double lo = data.min(attribute), hi = data.max(attribute);
  if (!(hi > lo)) {
    throw Error(ErrorKind::DegenerateAttribute, "all values of '" + a.name + "' are identical");
  }
  BinningSpec binning{a.name, bin_count, {}};
  const double width = (hi - lo) / static_cast<double>(bin_count);
  for (std::size_t b = 1; b < bin_count; ++b) binning.edges.push_back(lo + width * static_cast<double>(b));
  return binning;
}

inline BinningSpec equal_width_bins(const Dataset& data, std::string_view attribute, std::size_t bin_count) {
  auto j = data.attribute_index(attribute);
  if (!j) throw Error(ErrorKind::UnknownAttribute, std::string(attribute));
  return equal_width_bins(data, *j, bin_count);
}

/// Binnings for every continuous attribute. A constant attribute gets a
/// single cut at its value, which puts every point in bin 1.
inline std::vector<BinningSpec> default_binnings(const Dataset& data, std::size_t bin_count) {
  std::vector<BinningSpec> out;
  for (std::size_t j = 0; j < data.dims(); ++j) {
    if (data.attribute(j).discrete()) continue;
    if (data.max(j) > data.min(j)) {
      out.push_back(equal_width_bins(data, j, bin_count));
    } else {
      out.push_back(BinningSpec{data.attribute(j).name, 2, {data.min(j)}});
    }
  }
  return out;
}

inline nlohmann::json binnings_to_json(const std::vector<BinningSpec>& bins) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : bins) {
    arr.push_back({{"attribute", b.attribute}, {"bin_count", b.bin_count}, {"edges", b.edges}});
  }
  return nlohmann::json{{"bins", arr}};
}

inline std::vector<BinningSpec> binnings_from_json(const nlohmann::json& j) {
  std::vector<BinningSpec> out;
  for (const auto& item : j.at("bins")) {
    BinningSpec b{item.at("attribute").get<std::string>(), item.at("bin_count").get<std::size_t>(),
                  item.at("edges").get<std::vector<double>>()};
    if (b.bin_count < 2 || b.edges.size() + 1 != b.bin_count ||
        std::adjacent_find(b.edges.begin(), b.edges.end(), std::greater_equal<>()) != b.edges.end()) {
      throw Error(ErrorKind::Config, "malformed binning for '" + b.attribute + "'");
    }
    out.push_back(std::move(b));
  }
  return out;
}

/// Every attribute mapped to a small integer code: the category index for
/// discrete attributes, the bin index for continuous ones.
struct Discretized {
  std::vector<std::size_t> cardinality;  // per attribute
  std::vector<std::size_t> codes;        // row-major n x d

  std::size_t code(std::size_t i, std::size_t j) const noexcept { return codes[i * cardinality.size() + j]; }
};

inline const BinningSpec* find_binning(const std::vector<BinningSpec>& bins, const std::string& name) {
  for (const auto& b : bins) {
    if (b.attribute == name) return &b;
  }
  return nullptr;
}

inline Discretized discretize(const Dataset& data, const std::vector<BinningSpec>& bins) {
  const std::size_t d = data.dims();
  Discretized out;
  out.cardinality.resize(d);
  std::vector<const BinningSpec*> binning(d, nullptr);
  for (std::size_t j = 0; j < d; ++j) {
    const auto& a = data.attribute(j);
    if (a.discrete()) {
      out.cardinality[j] = a.categories.size();
    } else {
      binning[j] = find_binning(bins, a.name);
      if (!binning[j]) throw Error(ErrorKind::MissingBinning, "attribute '" + a.name + "'");
      out.cardinality[j] = binning[j]->bin_count;
    }
  }
  out.codes.resize(data.size() * d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out.codes[i * d + j] = binning[j] ? binning[j]->bin_of(data.value(i, j)) : data.category(i, j);
    }
  }
  return out;
}

/// Mean per-attribute dissimilarity: |delta|/range for continuous values,
/// 0/1 mismatch for categorical ones, |delta rank|/(m-1) for ordinal ones.
/// Attributes with zero range contribute 0. Results are snapped to a 2^-40
/// grid so that equal distances compare equal whatever the summation order.
class GowerDistance {
 public:
  explicit GowerDistance(const Dataset& data) : data_(&data) {
    range_.resize(data.dims());
    for (std::size_t j = 0; j < data.dims(); ++j) range_[j] = data.range(j);
  }

  double operator()(std::span<const double> a, std::span<const double> b) const noexcept {
    const auto& schema = data_->schema();
    double sum = 0.0;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (schema[j].kind == AttributeKind::categorical) {
        sum += a[j] == b[j] ? 0.0 : 1.0;
      } else {
        if (range_[j] > 0) sum += std::min(1.0, std::abs(a[j] - b[j]) / range_[j]);
      }
    }
    return std::ldexp(std::round(std::ldexp(sum / static_cast<double>(schema.size()), 40)), -40);
  }

  double operator()(std::size_t i, std::size_t k) const noexcept {
    return (*this)(data_->row(i), data_->row(k));
  }

 private:
  const Dataset* data_;
  std::vector<double> range_;
};

struct Neighbor {
  std::size_t point;
  double distance;
};

struct NeighborMatrix {
  std::size_t k = 0;
  std::vector<std::vector<Neighbor>> neighbors;  // per point, nearest first
};

/// Exact k nearest neighbors of every point under Gower distance, ties broken
/// by ascending point id. O(n^2 d) distance evaluations.
inline NeighborMatrix build_neighbor_matrix(const Dataset& data, std::size_t k) {
  const std::size_t n = data.size();
  if (k < 1 || k >= n) {
    throw Error(ErrorKind::KTooLarge, "k=" + std::to_string(k) + " needs 1 <= k < n=" + std::to_string(n));
  }
  GowerDistance dist(data);
  NeighborMatrix m;
  m.k = k;
  m.neighbors.resize(n);
  std::vector<Neighbor> row(n - 1);
  auto closer = [&](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return data.id_rank(a.point) < data.id_rank(b.point);
  };
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t w = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row[w++] = Neighbor{j, dist(i, j)};
    }
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end(), closer);
    m.neighbors[i].assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return m;
}

/// Concept vocabulary and, per point, one concept id per attribute.
struct ConceptMap {
  std::vector<std::string> tokens;                 // concept id -> "attr:value"
  std::vector<std::vector<std::size_t>> concepts;  // per point, length d

  std::vector<std::string> tokens_of(std::size_t point) const {
    std::vector<std::string> out;
    for (auto c : concepts[point]) out.push_back(tokens[c]);
    return out;
  }
};

/// Tokens are "<attribute>:<category>" for discrete attributes and
/// "<attribute>:<bin index>" for continuous ones.
inline ConceptMap extract_concepts(const Dataset& data, const std::vector<BinningSpec>& bins) {
  const auto disc = discretize(data, bins);
  ConceptMap out;
  std::unordered_map<std::string, std::size_t> ids;
  out.concepts.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.concepts[i].reserve(data.dims());
    for (std::size_t j = 0; j < data.dims(); ++j) {
      const auto& a = data.attribute(j);
      std::string token = a.name + ":" +
                          (a.discrete() ? a.categories[disc.code(i, j)] : std::to_string(disc.code(i, j)));
      auto [it, fresh] = ids.emplace(token, out.tokens.size());
      if (fresh) out.tokens.push_back(std::move(token));
      out.concepts[i].push_back(it->second);
    }
  }
  return out;
}

}  // namespace usermodel
