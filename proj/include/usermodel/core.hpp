#pragma once

// Domain types shared by every user model: attribute schema, the visualized
// dataset, interaction sessions, score containers and the model contract.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace usermodel {

enum class ErrorKind {
  DuplicateId,
  UnknownCategory,
  NonFiniteValue,
  MissingColumn,
  InvalidSchema,
  UnknownPoint,
  NonMonotonicTime,
  DegenerateAttribute,
  KTooLarge,
  MissingBinning,
  AllPointsPositive,
  NotFitted,
  NoVisualizedAttributes,
  NotObserved,
  TooManyAttributes,
  ZeroExpectedCell,
  EmptySample,
  EmptyHistory,
  MemberNotReady,
  EmptyRecords,
  UnknownAttribute,
  EmptyFocus,
  InvalidArgument,
  Config,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::UnknownCategory: return "UnknownCategory";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::InvalidSchema: return "InvalidSchema";
    case ErrorKind::UnknownPoint: return "UnknownPoint";
    case ErrorKind::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorKind::DegenerateAttribute: return "DegenerateAttribute";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::MissingBinning: return "MissingBinning";
    case ErrorKind::AllPointsPositive: return "AllPointsPositive";
    case ErrorKind::NotFitted: return "NotFitted";
    case ErrorKind::NoVisualizedAttributes: return "NoVisualizedAttributes";
    case ErrorKind::NotObserved: return "NotObserved";
    case ErrorKind::TooManyAttributes: return "TooManyAttributes";
    case ErrorKind::ZeroExpectedCell: return "ZeroExpectedCell";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::EmptyHistory: return "EmptyHistory";
    case ErrorKind::MemberNotReady: return "MemberNotReady";
    case ErrorKind::EmptyRecords: return "EmptyRecords";
    case ErrorKind::UnknownAttribute: return "UnknownAttribute";
    case ErrorKind::EmptyFocus: return "EmptyFocus";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

enum class AttributeKind { continuous, categorical, ordinal };

inline std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::continuous: return "continuous";
    case AttributeKind::categorical: return "categorical";
    case AttributeKind::ordinal: return "ordinal";
  }
  return "continuous";
}

inline AttributeKind parse_attribute_kind(std::string_view s) {
  if (s == "continuous") return AttributeKind::continuous;
  if (s == "categorical") return AttributeKind::categorical;
  if (s == "ordinal") return AttributeKind::ordinal;
  throw Error(ErrorKind::InvalidSchema, "unknown attribute kind '" + std::string(s) + "'");
}

struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::continuous;
  std::vector<std::string> categories;  // ordered; empty iff continuous
  bool visualized = true;

  bool discrete() const noexcept { return kind != AttributeKind::continuous; }

  std::optional<std::size_t> category_index(std::string_view token) const {
    for (std::size_t i = 0; i < categories.size(); ++i) {
      if (categories[i] == token) return i;
    }
    return std::nullopt;
  }
};

/// Checks per-attribute and cross-attribute schema invariants; throws
/// InvalidSchema on the first violation.
inline void check_schema(std::span<const AttributeSchema> schema) {
  if (schema.empty()) throw Error(ErrorKind::InvalidSchema, "schema has no attributes");
  std::unordered_set<std::string> names;
  for (const auto& a : schema) {
    if (a.name.empty()) throw Error(ErrorKind::InvalidSchema, "attribute with empty name");
    if (a.name == "point_id") {
      throw Error(ErrorKind::InvalidSchema, "attribute name 'point_id' is reserved");
    }
    if (!names.insert(a.name).second) {
      throw Error(ErrorKind::InvalidSchema, "duplicate attribute name '" + a.name + "'");
    }
    if (a.discrete()) {
      if (a.categories.empty()) {
        throw Error(ErrorKind::InvalidSchema, "attribute '" + a.name + "' needs categories");
      }
      std::unordered_set<std::string> seen;
      for (const auto& c : a.categories) {
        if (!seen.insert(c).second) {
          throw Error(ErrorKind::InvalidSchema,
                      "attribute '" + a.name + "' repeats category '" + c + "'");
        }
      }
    } else if (!a.categories.empty()) {
      throw Error(ErrorKind::InvalidSchema,
                  "continuous attribute '" + a.name + "' must not list categories");
    }
  }
}

/// The visualized point set. Values are stored row-major (n x d); discrete
/// attributes hold the category index as a double.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<AttributeSchema> schema, std::vector<std::string> ids,
          std::vector<double> values)
      : schema_(std::move(schema)), ids_(std::move(ids)), values_(std::move(values)) {
    check_schema(schema_);
    if (ids_.empty()) throw Error(ErrorKind::InvalidArgument, "dataset has no points");
    if (values_.size() != ids_.size() * schema_.size()) {
      throw Error(ErrorKind::InvalidArgument, "value matrix does not match n x d");
    }
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (!index_.emplace(ids_[i], i).second) {
        throw Error(ErrorKind::DuplicateId, "point_id '" + ids_[i] + "' (row " +
                                                std::to_string(i + 1) + ")");
      }
    }
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      for (std::size_t j = 0; j < schema_.size(); ++j) {
        const double v = value(i, j);
        const auto& a = schema_[j];
        if (!std::isfinite(v)) {
          throw Error(ErrorKind::NonFiniteValue,
                      "row " + std::to_string(i + 1) + ", column '" + a.name + "'");
        }
        if (a.discrete() && (v < 0 || v >= static_cast<double>(a.categories.size()) ||
                             v != std::floor(v))) {
          throw Error(ErrorKind::UnknownCategory,
                      "row " + std::to_string(i + 1) + ", column '" + a.name + "'");
        }
      }
    }
    std::vector<std::size_t> order(ids_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ids_[a] < ids_[b]; });
    id_rank_.resize(ids_.size());
    for (std::size_t r = 0; r < order.size(); ++r) id_rank_[order[r]] = r;
    min_.assign(schema_.size(), 0.0);
    max_.assign(schema_.size(), 0.0);
    for (std::size_t j = 0; j < schema_.size(); ++j) {
      double lo = value(0, j), hi = value(0, j);
      for (std::size_t i = 1; i < ids_.size(); ++i) {
        lo = std::min(lo, value(i, j));
        hi = std::max(hi, value(i, j));
      }
      min_[j] = lo;
      max_[j] = hi;
    }
  }

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dims() const noexcept { return schema_.size(); }
  const std::vector<AttributeSchema>& schema() const noexcept { return schema_; }
  const AttributeSchema& attribute(std::size_t j) const { return schema_.at(j); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::string& id(std::size_t i) const { return ids_.at(i); }

  double value(std::size_t i, std::size_t j) const noexcept { return values_[i * schema_.size() + j]; }
  std::size_t category(std::size_t i, std::size_t j) const noexcept {
    return static_cast<std::size_t>(value(i, j));
  }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * schema_.size(), schema_.size()};
  }

  std::optional<std::size_t> find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> attribute_index(std::string_view name) const {
    for (std::size_t j = 0; j < schema_.size(); ++j) {
      if (schema_[j].name == name) return j;
    }
    return std::nullopt;
  }

  /// Position of point i in the lexical ordering of point ids.
  std::size_t id_rank(std::size_t i) const noexcept { return id_rank_[i]; }

  double min(std::size_t j) const noexcept { return min_[j]; }
  double max(std::size_t j) const noexcept { return max_[j]; }
  /// Continuous: max - min. Discrete: number of categories - 1.
  double range(std::size_t j) const noexcept {
    if (schema_[j].discrete()) return static_cast<double>(schema_[j].categories.size()) - 1.0;
    return max_[j] - min_[j];
  }

  /// Display form of a value: the number for continuous, the category token otherwise.
  std::string format_value(std::size_t i, std::size_t j) const;

 private:
  std::vector<AttributeSchema> schema_;
  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> id_rank_;
  std::vector<double> min_, max_;
};

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string Dataset::format_value(std::size_t i, std::size_t j) const {
  if (schema_[j].discrete()) return schema_[j].categories[category(i, j)];
  return format_number(value(i, j));
}

struct InteractionEvent {
  std::string point_id;
  std::int64_t t = 1;
  std::string action = "click";
  std::size_t point = 0;  // dataset index, resolved by validate_session
};

struct Session {
  std::string session_id;
  std::vector<InteractionEvent> events;
};

/// Per-point belief that the next interaction targets the point, aligned with
/// dataset order. Values lie in [0,1]; they are not a distribution.
struct RankScores {
  std::vector<double> values;
};

/// Per-attribute (or per-group) bias in [0,1], aligned with `names`.
struct BiasScores {
  std::vector<std::string> names;
  std::vector<double> values;

  double at(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return values[i];
    }
    throw Error(ErrorKind::UnknownAttribute, std::string(name));
  }
};

/// Min-max rescale into [0,1]; a constant vector maps to 0.5 everywhere.
inline std::vector<double> rescale_unit(std::vector<double> v) {
  if (v.empty()) return v;
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo) || !std::isfinite(hi - lo)) {
    std::fill(v.begin(), v.end(), 0.5);
    return v;
  }
  for (auto& x : v) x = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  return v;
}

/// Descending by score, ties by ascending point id.
inline std::vector<std::size_t> to_ordering(const RankScores& r, const Dataset& data) {
  std::vector<std::size_t> order(r.values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (r.values[a] != r.values[b]) return r.values[a] > r.values[b];
    return data.id_rank(a) < data.id_rank(b);
  });
  return order;
}

inline std::vector<std::string> to_ordering(const std::map<std::string, double>& scores) {
  std::vector<std::pair<std::string, double>> items(scores.begin(), scores.end());
  // std::map iteration is already ascending by id, so a stable sort keeps the tie rule.
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  out.reserve(items.size());
  for (auto& [id, _] : items) out.push_back(id);
  return out;
}

/// 1-based rank of `target` under to_ordering, computed without sorting.
inline std::size_t rank_of(const RankScores& r, const Dataset& data, std::size_t target) {
  const double s = r.values[target];
  const std::size_t tr = data.id_rank(target);
  std::size_t ahead = 0;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (r.values[i] > s || (r.values[i] == s && data.id_rank(i) < tr)) ++ahead;
  }
  return ahead + 1;
}

struct Capabilities {
  bool predicts = false;
  bool detects_bias = false;
};

/// Contract every user model implements. observe() is the only mutator;
/// rank_all() and bias_all() are queries of the current state.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  virtual Capabilities capabilities() const = 0;
  virtual void observe(const InteractionEvent& event) = 0;

  virtual RankScores rank_all() const {
    throw Error(ErrorKind::InvalidArgument, name() + " does not predict interactions");
  }
  virtual BiasScores bias_all() const {
    throw Error(ErrorKind::InvalidArgument, name() + " does not detect bias");
  }
  /// False when the latest bias values rest on a violated test assumption.
  virtual bool assumptions_ok() const { return true; }
};

inline std::vector<std::string> attribute_names(const Dataset& data) {
  std::vector<std::string> names;
  names.reserve(data.dims());
  for (const auto& a : data.schema()) names.push_back(a.name);
  return names;
}

}  // namespace usermodel
