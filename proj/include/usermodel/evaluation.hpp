#pragma once

// Session replay and the evaluation measures: rank of the realized next
// interaction, success within top-kappa prediction sets, and bias timelines.

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "usermodel/core.hpp"

namespace usermodel {

inline const std::vector<std::size_t> kDefaultKappas{1, 5, 10, 20, 50, 100};

struct PredictionRecord {
  std::string session_id;
  std::int64_t t = 0;
  std::string model;
  std::size_t rank = 0;
  std::map<std::size_t, bool> success;  // kappa -> rank <= kappa
};

/// Scores every event after the first: the model has seen events 1..t-1
/// when event t is ranked, and observes event t afterwards.
inline std::vector<PredictionRecord> replay(const Dataset& data, const Session& session, Model& model,
                                            const std::vector<std::size_t>& kappas = kDefaultKappas) {
  if (session.events.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "session '" + session.session_id + "' has fewer than 2 events");
  }
  std::vector<PredictionRecord> out;
  out.reserve(session.events.size() - 1);
  const std::string model_name = model.name();
  for (std::size_t e = 0; e < session.events.size(); ++e) {
    const auto& ev = session.events[e];
    try {
      if (e > 0) {
        const auto scores = model.rank_all();
        if (scores.values.size() != data.size()) {
          throw Error(ErrorKind::InvalidArgument, "rank_all returned " + std::to_string(scores.values.size()) +
                                                      " scores for " + std::to_string(data.size()) + " points");
        }
        PredictionRecord rec{session.session_id, ev.t, model_name, rank_of(scores, data, ev.point), {}};
        for (auto k : kappas) rec.success[k] = rec.rank <= k;
        out.push_back(std::move(rec));
      }
      model.observe(ev);
    } catch (const Error& err) {
      throw Error(err.kind(), "session '" + session.session_id + "', t=" + std::to_string(ev.t) + ": " + err.what());
    }
  }
  return out;
}

/// Pooled success rate: sum of successes over sum of predictions.
inline double success_rate(const std::vector<PredictionRecord>& records, std::size_t kappa) {
  if (records.empty()) throw Error(ErrorKind::EmptyRecords, "no prediction records");
  std::size_t hits = 0;
  for (const auto& r : records) {
    auto it = r.success.find(kappa);
    if (it == r.success.end()) throw Error(ErrorKind::InvalidArgument, "kappa " + std::to_string(kappa) + " not recorded");
    hits += it->second;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

inline double mean_rank(const std::vector<PredictionRecord>& records) {
  if (records.empty()) throw Error(ErrorKind::EmptyRecords, "no prediction records");
  double s = 0.0;
  for (const auto& r : records) s += static_cast<double>(r.rank);
  return s / static_cast<double>(records.size());
}

struct AttributeGroup {
  std::string name;
  std::vector<std::string> members;
};

/// Parses "location=lon+lat;type=type". A bare name is a singleton group.
inline std::vector<AttributeGroup> parse_groups(std::string_view text) {
  std::vector<AttributeGroup> groups;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find(';', pos), text.size());
    const std::string item(text.substr(pos, end - pos));
    pos = end + 1;
    if (item.empty()) continue;
    AttributeGroup g;
    const auto eq = item.find('=');
    g.name = item.substr(0, eq);
    const std::string rhs = eq == std::string::npos ? g.name : item.substr(eq + 1);
    std::size_t p = 0;
    while (p <= rhs.size()) {
      const auto plus = std::min(rhs.find('+', p), rhs.size());
      if (plus > p) g.members.push_back(rhs.substr(p, plus - p));
      p = plus + 1;
    }
    if (g.name.empty() || g.members.empty()) throw Error(ErrorKind::Config, "malformed group '" + item + "'");
    groups.push_back(std::move(g));
  }
  return groups;
}

/// Group score = product of member scores. With no groups the scores pass
/// through unchanged.
inline BiasScores combine_bias(const BiasScores& scores, const std::vector<AttributeGroup>& groups) {
  if (groups.empty()) return scores;
  BiasScores out;
  for (const auto& g : groups) {
    double v = 1.0;
    for (const auto& m : g.members) {
      const auto it = std::find(scores.names.begin(), scores.names.end(), m);
      if (it == scores.names.end()) {
        throw Error(ErrorKind::UnknownAttribute, "group '" + g.name + "' names unknown attribute '" + m + "'");
      }
      v *= scores.values[static_cast<std::size_t>(it - scores.names.begin())];
    }
    out.names.push_back(g.name);
    out.values.push_back(v);
  }
  return out;
}

/// Index of the largest score; ties go to the lexically smallest name.
inline std::size_t top_index(const BiasScores& b) {
  if (b.values.empty()) throw Error(ErrorKind::InvalidArgument, "empty bias scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < b.values.size(); ++i) {
    if (b.values[i] > b.values[best] || (b.values[i] == b.values[best] && b.names[i] < b.names[best])) best = i;
  }
  return best;
}

struct BiasTimelineRecord {
  std::string session_id;
  std::int64_t t = 0;
  std::string model;
  std::string top;
  double confidence = 0.0;  // max score / sum of scores
  bool assumption_ok = true;
  BiasScores scores;
};

inline BiasTimelineRecord timeline_record(const Session& session, std::int64_t t, const Model& model,
                                          const std::vector<AttributeGroup>& groups) {
  BiasTimelineRecord rec;
  rec.session_id = session.session_id;
  rec.t = t;
  rec.model = model.name();
  rec.scores = combine_bias(model.bias_all(), groups);
  const auto best = top_index(rec.scores);
  rec.top = rec.scores.names[best];
  double total = 0.0;
  for (double v : rec.scores.values) total += v;
  rec.confidence = total > 0 ? rec.scores.values[best] / total : 0.0;
  rec.assumption_ok = model.assumptions_ok();
  return rec;
}

/// One record after every observed event.
inline std::vector<BiasTimelineRecord> bias_timeline(const Session& session, Model& model,
                                                     const std::vector<AttributeGroup>& groups = {}) {
  if (!model.capabilities().detects_bias) {
    throw Error(ErrorKind::InvalidArgument, "model '" + model.name() + "' does not detect bias");
  }
  std::vector<BiasTimelineRecord> out;
  out.reserve(session.events.size());
  for (const auto& ev : session.events) {
    try {
      model.observe(ev);
      out.push_back(timeline_record(session, ev.t, model, groups));
    } catch (const Error& err) {
      throw Error(err.kind(), "session '" + session.session_id + "', t=" + std::to_string(ev.t) + ": " + err.what());
    }
  }
  return out;
}

inline nlohmann::json to_json(const PredictionRecord& r) {
  nlohmann::json success = nlohmann::json::object();
  for (const auto& [k, hit] : r.success) success[std::to_string(k)] = hit ? 1 : 0;
  return {{"kind", "prediction"}, {"session_id", r.session_id}, {"t", r.t},
          {"model", r.model},     {"rank", r.rank},             {"success", success}};
}

inline nlohmann::json to_json(const BiasTimelineRecord& r) {
  nlohmann::json scores = nlohmann::json::object();
  for (std::size_t i = 0; i < r.scores.names.size(); ++i) scores[r.scores.names[i]] = r.scores.values[i];
  return {{"kind", "bias"},          {"session_id", r.session_id}, {"t", r.t},
          {"model", r.model},        {"top", r.top},               {"confidence", r.confidence},
          {"assumption_ok", r.assumption_ok}, {"scores", scores}};
}

/// Runs `jobs` independent tasks on up to `workers` threads. Results are
/// addressed by task index, so completion order never matters. The first
/// exception (lowest task index) is rethrown after all workers finish.
inline void run_parallel(std::size_t jobs, std::size_t workers, const std::function<void(std::size_t)>& task) {
  workers = std::max<std::size_t>(1, std::min(workers, jobs));
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    loop();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace usermodel
