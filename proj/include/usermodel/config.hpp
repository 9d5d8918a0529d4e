#pragma once

// Run configuration as a flat map of dotted keys ("knn.k", "hmm.seed").
// Nested JSON objects are flattened; later sources override earlier ones.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "usermodel/core.hpp"

namespace usermodel {

class Config {
 public:
  Config() = default;

  static Config from_json(const nlohmann::json& j) {
    Config c;
    c.merge_json(j);
    return c;
  }

  void merge_json(const nlohmann::json& j, const std::string& prefix = "") {
    if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      const std::string full = prefix.empty() ? key : prefix + "." + key;
      if (value.is_object()) {
        merge_json(value, full);
      } else {
        values_[full] = value;
      }
    }
  }

  /// "key=value"; the value is parsed as JSON when possible, else kept as a string.
  void set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorKind::Config, "expected key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    auto parsed = nlohmann::json::parse(text, nullptr, false);
    values_[key] = parsed.is_discarded() ? nlohmann::json(text) : parsed;
  }

  void set(const std::string& key, nlohmann::json value) { values_[key] = std::move(value); }

  bool contains(const std::string& key) const { return values_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return it->second.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::Config, "config key '" + key + "' has the wrong type: " + it->second.dump());
    }
  }

  /// Keys below `prefix.` with the prefix stripped.
  std::map<std::string, nlohmann::json> under(const std::string& prefix) const {
    std::map<std::string, nlohmann::json> out;
    const std::string p = prefix + ".";
    for (auto it = values_.lower_bound(p); it != values_.end() && it->first.rfind(p, 0) == 0; ++it) {
      out.emplace(it->first.substr(p.size()), it->second);
    }
    return out;
  }

  const std::map<std::string, nlohmann::json>& values() const noexcept { return values_; }

 private:
  std::map<std::string, nlohmann::json> values_;
};

}  // namespace usermodel
