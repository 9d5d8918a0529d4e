#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <random>
#include <string>
#include <vector>

#include "usermodel/usermodel.hpp"

namespace testing_support {

using namespace usermodel;

inline AttributeSchema continuous(const std::string& name, bool visualized = true) {
  return {name, AttributeKind::continuous, {}, visualized};
}

inline AttributeSchema categorical(const std::string& name, std::vector<std::string> cats, bool visualized = true) {
  return {name, AttributeKind::categorical, std::move(cats), visualized};
}

inline AttributeSchema ordinal(const std::string& name, std::vector<std::string> cats) {
  return {name, AttributeKind::ordinal, std::move(cats), true};
}

inline std::vector<std::string> letters(std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(std::string(1, static_cast<char>('A' + i)));
  return out;
}

/// Rows given as doubles (category indices for discrete attributes); ids
/// default to p1..pn.
inline Dataset make_dataset(std::vector<AttributeSchema> schema, const std::vector<std::vector<double>>& rows,
                            std::vector<std::string> ids = {}) {
  if (ids.empty()) {
    for (std::size_t i = 0; i < rows.size(); ++i) ids.push_back("p" + std::to_string(i + 1));
  }
  std::vector<double> values;
  for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  return Dataset(std::move(schema), std::move(ids), std::move(values));
}

/// A random mixed schema with `d` attributes cycling through the three kinds.
inline std::vector<AttributeSchema> random_schema(std::size_t d, std::mt19937_64& rng) {
  std::vector<AttributeSchema> s;
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t m = 2 + rng() % 4;
    switch ((j + rng() % 3) % 3) {
      case 0: s.push_back(continuous("a" + std::to_string(j))); break;
      case 1: s.push_back(categorical("a" + std::to_string(j), letters(m))); break;
      default: s.push_back(ordinal("a" + std::to_string(j), letters(m))); break;
    }
  }
  return s;
}

/// Random dataset; continuous values are coarse (multiples of 0.1) so
/// distance ties occur and exercise the tie rule.
inline Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto schema = random_schema(d, rng);
  std::vector<std::vector<double>> rows(n);
  for (auto& r : rows) {
    for (const auto& a : schema) {
      r.push_back(a.discrete() ? static_cast<double>(rng() % a.categories.size())
                               : static_cast<double>(rng() % 11) / 10.0);
    }
  }
  std::vector<std::string> ids(n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);  // ids not in row order
  for (std::size_t i = 0; i < n; ++i) ids[i] = "q" + std::to_string(1000 + perm[i]);
  return make_dataset(std::move(schema), rows, std::move(ids));
}

inline InteractionEvent event(const Dataset& data, std::size_t point, std::int64_t t,
                              const std::string& action = "click") {
  return {data.id(point), t, action, point};
}

inline Session session_of(const Dataset& data, const std::vector<std::size_t>& points, const std::string& id = "s1") {
  Session s{id, {}};
  for (std::size_t e = 0; e < points.size(); ++e) s.events.push_back(event(data, points[e], static_cast<std::int64_t>(e + 1)));
  return s;
}

// Independent Gower evaluation straight from the definition.
inline double oracle_distance(const Dataset& d, std::size_t a, std::size_t b) {
  double total = 0;
  for (std::size_t j = 0; j < d.dims(); ++j) {
    const auto& attr = d.attribute(j);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < d.size(); ++i) {
      lo = std::min(lo, d.value(i, j));
      hi = std::max(hi, d.value(i, j));
    }
    const double va = d.value(a, j), vb = d.value(b, j);
    if (attr.kind == AttributeKind::categorical) {
      total += va == vb ? 0 : 1;
    } else if (attr.kind == AttributeKind::ordinal) {
      total += std::abs(va - vb) / static_cast<double>(attr.categories.size() - 1);
    } else if (hi > lo) {
      total += std::abs(va - vb) / (hi - lo);
    }
  }
  return total / static_cast<double>(d.dims());
}

// All other points sorted by (distance, id string).
inline std::vector<std::size_t> oracle_neighbors(const Dataset& d, std::size_t i) {
  std::vector<std::size_t> others;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (j != i) others.push_back(j);
  }
  std::vector<double> dist(d.size());
  for (auto j : others) dist[j] = oracle_distance(d, i, j);
  std::sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(dist[a] - dist[b]) > 1e-12) return dist[a] < dist[b];
    return d.id(a) < d.id(b);
  });
  return others;
}

/// kNN scores recomputed from scratch: neighbors from the brute-force
/// oracle, labels from the set of interacted points.
inline std::vector<double> oracle_knn_scores(const Dataset& d, const std::set<std::size_t>& positives, std::size_t k,
                                             double alpha) {
  std::vector<double> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto nb = oracle_neighbors(d, i);
    std::size_t pos = 0;
    for (std::size_t r = 0; r < k; ++r) pos += positives.count(nb[r]);
    out.push_back((static_cast<double>(pos) + alpha) / (static_cast<double>(k) + 2 * alpha));
  }
  return out;
}

// Brute-force posterior and BMA over every subset of a small dataset,
// written directly from the model definitions.
struct CmEnumeration {
  std::vector<double> posterior;  // by subset mask
  std::vector<double> bma;        // per point, weighted sum before rescaling
};

inline CmEnumeration oracle_cm_enumeration(const Dataset& d, const std::vector<std::size_t>& clicks, double bw, double alpha) {
  const std::size_t dims = d.dims(), n = d.size(), models = std::size_t{1} << dims;
  auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  auto term = [&](std::size_t j, double v, const std::vector<std::size_t>& seen) {
    const auto& a = d.attribute(j);
    if (a.discrete()) {
      double c = 0;
      for (auto s : seen) c += d.value(s, j) == v;
      return (c + alpha) / (static_cast<double>(seen.size()) + alpha * static_cast<double>(a.categories.size()));
    }
    const double lo = d.min(j), hi = d.max(j), w = bw * (hi - lo);
    if (seen.empty()) return 1.0 / (hi - lo);
    double s = 0;
    for (auto p : seen) {
      const double c = d.value(p, j);
      const double z = (v - c) / w;
      s += std::exp(-0.5 * z * z) / (w * std::sqrt(2 * std::numbers::pi)) / (phi((hi - c) / w) - phi((lo - c) / w));
    }
    return s / static_cast<double>(seen.size());
  };
  auto predictive = [&](std::size_t mask, std::size_t x, const std::vector<std::size_t>& seen) {
    if (mask == 0 || seen.empty()) return 1.0 / static_cast<double>(n);
    auto unnorm = [&](std::size_t y) {
      double p = 1;
      for (std::size_t j = 0; j < dims; ++j) {
        if (mask >> j & 1) p *= term(j, d.value(y, j), seen);
      }
      return p;
    };
    double z = 0;
    for (std::size_t y = 0; y < n; ++y) z += unnorm(y);
    return unnorm(x) / z;
  };
  CmEnumeration e;
  e.posterior.assign(models, 1.0 / static_cast<double>(models));
  std::vector<std::size_t> seen;
  for (auto x : clicks) {
    double z = 0;
    for (std::size_t m = 0; m < models; ++m) {
      e.posterior[m] *= predictive(m, x, seen);
      z += e.posterior[m];
    }
    for (auto& p : e.posterior) p /= z;
    seen.push_back(x);
  }
  e.bma.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t m = 0; m < models; ++m) e.bma[x] += e.posterior[m] * predictive(m, x, seen);
  }
  return e;
}

/// Scripted model: scores and bias are computed from the observed history by
/// user-supplied functions.
class StubModel final : public Model {
 public:
  using RankFn = std::function<std::vector<double>(const std::vector<std::size_t>&)>;
  using BiasFn = std::function<BiasScores(const std::vector<std::size_t>&)>;

  StubModel(std::string name, RankFn rank, BiasFn bias = {})
      : name_(std::move(name)), rank_(std::move(rank)), bias_(std::move(bias)) {}

  std::string name() const override { return name_; }
  Capabilities capabilities() const override { return {static_cast<bool>(rank_), static_cast<bool>(bias_)}; }
  void observe(const InteractionEvent& e) override {
    if (fail_at && history_.size() + 1 == *fail_at) throw Error(ErrorKind::InvalidArgument, "scripted failure");
    history_.push_back(e.point);
  }
  RankScores rank_all() const override {
    if (!rank_) return Model::rank_all();
    ++rank_calls;
    return {rank_(history_)};
  }
  BiasScores bias_all() const override {
    if (!bias_) return Model::bias_all();
    return bias_(history_);
  }
  bool assumptions_ok() const override { return assumptions; }

  const std::vector<std::size_t>& history() const noexcept { return history_; }

  std::optional<std::size_t> fail_at;  // 1-based observe call that throws
  bool assumptions = true;
  mutable std::size_t rank_calls = 0;

 private:
  std::string name_;
  RankFn rank_;
  BiasFn bias_;
  std::vector<std::size_t> history_;
};

/// A fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("usermodel_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing_support
