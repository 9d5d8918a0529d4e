#pragma once

// Synthetic datasets and sessions with a planted exploration bias.

#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "usermodel/core.hpp"

namespace usermodel {

/// Zero-padded identifier, e.g. ("p", 7, 2000) -> "p0007".
inline std::string padded_id(const std::string& prefix, std::size_t index, std::size_t count) {
  const int width = static_cast<int>(std::to_string(count).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, index);
  return prefix + buf;
}

/// Continuous attributes uniform on [0,1]; discrete ones uniform over their
/// declared categories.
inline Dataset gen_dataset(std::size_t n, const std::vector<AttributeSchema>& schema, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  check_schema(schema);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::string> ids;
  std::vector<double> values;
  ids.reserve(n);
  values.reserve(n * schema.size());
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(padded_id("p", i + 1, n));
    for (const auto& a : schema) {
      if (a.discrete()) {
        std::uniform_int_distribution<std::size_t> cat(0, a.categories.size() - 1);
        values.push_back(static_cast<double>(cat(rng)));
      } else {
        values.push_back(unit(rng));
      }
    }
  }
  return Dataset(schema, std::move(ids), std::move(values));
}

/// Two continuous and two categorical attributes; "type" has eight
/// categories and "group" three.
inline std::vector<AttributeSchema> default_synthetic_schema() {
  return {
      {"x", AttributeKind::continuous, {}, true},
      {"y", AttributeKind::continuous, {}, true},
      {"type", AttributeKind::categorical, {"A", "B", "C", "D", "E", "F", "G", "H"}, true},
      {"group", AttributeKind::categorical, {"g1", "g2", "g3"}, true},
  };
}

struct Focus {
  std::string attribute;
  std::optional<std::string> category;  // discrete attributes
  double lo = 0.0, hi = 0.0;            // continuous attributes, inclusive
};

struct TaskSpec {
  std::vector<Focus> focus;  // the planted (biased) attributes
  double noise = 0.1;        // eta
  std::size_t length = 20;
  std::size_t sessions = 30;
  std::uint64_t seed = 0;
};

/// Parses "type=A;x=0.2:0.4" into foci; numeric ranges use "lo:hi".
inline std::vector<Focus> parse_focus(const Dataset& data, std::string_view text) {
  std::vector<Focus> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find(';', pos), text.size());
    const std::string item(text.substr(pos, end - pos));
    pos = end + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Config, "focus '" + item + "' needs attr=value");
    Focus f;
    f.attribute = item.substr(0, eq);
    const std::string rhs = item.substr(eq + 1);
    const auto j = data.attribute_index(f.attribute);
    if (!j) throw Error(ErrorKind::UnknownAttribute, f.attribute);
    if (data.attribute(*j).discrete()) {
      f.category = rhs;
    } else {
      const auto colon = rhs.find(':');
      try {
        if (colon == std::string::npos) throw std::invalid_argument(rhs);
        f.lo = std::stod(rhs.substr(0, colon));
        f.hi = std::stod(rhs.substr(colon + 1));
      } catch (const std::exception&) {
        throw Error(ErrorKind::Config, "focus '" + item + "' needs a lo:hi range");
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

inline void check_task(const Dataset& data, const TaskSpec& task) {
  if (!(task.noise >= 0.0 && task.noise < 1.0)) throw Error(ErrorKind::Config, "noise must lie in [0,1)");
  if (task.length < 1) throw Error(ErrorKind::Config, "session length must be >= 1");
  for (const auto& f : task.focus) {
    const auto j = data.attribute_index(f.attribute);
    if (!j) throw Error(ErrorKind::UnknownAttribute, f.attribute);
    const auto& a = data.attribute(*j);
    if (a.discrete()) {
      if (!f.category || !a.category_index(*f.category)) {
        throw Error(ErrorKind::Config, "focus on '" + f.attribute + "' needs a known category");
      }
    } else if (f.category || !(f.lo <= f.hi)) {
      throw Error(ErrorKind::Config, "focus on '" + f.attribute + "' needs a range lo <= hi");
    }
  }
}

/// Points satisfying every focus condition.
inline std::vector<std::size_t> focus_subset(const Dataset& data, const TaskSpec& task) {
  check_task(data, task);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    bool in = true;
    for (const auto& f : task.focus) {
      const auto j = *data.attribute_index(f.attribute);
      const auto& a = data.attribute(j);
      if (a.discrete()) {
        in = in && data.category(i, j) == *a.category_index(*f.category);
      } else {
        in = in && data.value(i, j) >= f.lo && data.value(i, j) <= f.hi;
      }
    }
    if (in) out.push_back(i);
  }
  return out;
}

/// Each event comes from the focus subset with probability 1 - noise and
/// from the whole dataset otherwise, never repeating the previous point.
inline std::vector<Session> gen_sessions(const Dataset& data, const TaskSpec& task) {
  const auto focus = focus_subset(data, task);
  if (focus.empty()) throw Error(ErrorKind::EmptyFocus, "no point satisfies the focus");
  std::mt19937_64 rng(task.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any(0, data.size() - 1);
  std::uniform_int_distribution<std::size_t> in_focus(0, focus.size() - 1);

  std::vector<Session> out;
  for (std::size_t s = 0; s < task.sessions; ++s) {
    Session session{padded_id("s", s + 1, task.sessions), {}};
    std::optional<std::size_t> prev;
    for (std::size_t e = 0; e < task.length; ++e) {
      const bool from_focus = unit(rng) >= task.noise;
      const std::size_t pool = from_focus ? focus.size() : data.size();
      auto draw = [&] { return from_focus ? focus[in_focus(rng)] : any(rng); };
      std::size_t p = draw();
      if (prev && p == *prev && data.size() > 1) {
        if (pool > 1) {
          while (p == *prev) p = draw();
        } else {
          // A one-point source cannot avoid the repeat; step outside it.
          std::uniform_int_distribution<std::size_t> other(0, data.size() - 2);
          p = other(rng);
          if (p >= *prev) ++p;
        }
      }
      session.events.push_back({data.id(p), static_cast<std::int64_t>(e + 1), "click", p});
      prev = p;
    }
    out.push_back(std::move(session));
  }
  return out;
}

inline nlohmann::json ground_truth_json(const TaskSpec& task) {
  nlohmann::json attrs = nlohmann::json::array();
  nlohmann::json focus = nlohmann::json::object();
  for (const auto& f : task.focus) {
    attrs.push_back(f.attribute);
    if (f.category) {
      focus[f.attribute] = *f.category;
    } else {
      focus[f.attribute] = {f.lo, f.hi};
    }
  }
  return {{"biased_attributes", attrs}, {"focus", focus}, {"eta", task.noise},
          {"length", task.length},      {"sessions", task.sessions}, {"seed", task.seed}};
}

}  // namespace usermodel
