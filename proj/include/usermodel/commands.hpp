#pragma once

// The validate / bench / bias / synth commands. Each returns a process exit
// code: 0 success, 1 model failure at run time, 2 input or config error.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "usermodel/config.hpp"
#include "usermodel/core.hpp"
#include "usermodel/evaluation.hpp"
#include "usermodel/io.hpp"
#include "usermodel/preprocess.hpp"
#include "usermodel/registry.hpp"
#include "usermodel/synthetic.hpp"

namespace usermodel {

enum ExitCode : int { kExitOk = 0, kExitModelFailure = 1, kExitInputError = 2 };

struct RunConfig {
  std::string data;
  std::string schema;
  std::string sessions;
  std::vector<std::string> models;
  std::vector<std::size_t> kappas = kDefaultKappas;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::size_t jobs = 1;
  std::string groups;
  std::string bins_out;  // optional path for the binning specs
  Config config;         // file values merged with --set overrides
};

/// Builds a fresh model for the `stream`-th session. Tests swap this out for
/// stub models; the CLI uses the registry.
using ModelFactory = std::function<std::unique_ptr<Model>(const std::string& name, std::size_t stream)>;

struct Inputs {
  std::unique_ptr<Dataset> data;
  std::vector<Session> sessions;
};

namespace detail {

inline void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw Error(ErrorKind::Config, std::string("missing required ") + flag);
  if (!std::filesystem::is_regular_file(path)) throw Error(ErrorKind::Io, "no such file '" + path + "'");
}

inline Inputs load_inputs(const RunConfig& rc) {
  require_file(rc.schema, "--schema");
  require_file(rc.data, "--data");
  require_file(rc.sessions, "--sessions");
  Inputs in;
  in.data = std::make_unique<Dataset>(load_dataset(rc.data, load_schema(rc.schema)));
  in.sessions = load_sessions(rc.sessions, *in.data);
  if (in.sessions.empty()) throw Error(ErrorKind::EmptyHistory, "'" + rc.sessions + "' holds no sessions");
  return in;
}

inline void check_model_names(const std::vector<std::string>& models) {
  if (models.empty()) throw Error(ErrorKind::Config, "no models requested");
  for (const auto& m : models) {
    if (std::find(kModelNames.begin(), kModelNames.end(), m) == kModelNames.end()) {
      throw Error(ErrorKind::Config, "unknown model '" + m + "'");
    }
  }
}

inline Config effective_config(const RunConfig& rc) {
  Config c = rc.config;
  if (!c.contains("seed")) c.set("seed", rc.seed);
  return c;
}

inline void write_binnings(const RunConfig& rc, const Dataset& data, const Config& c) {
  if (rc.bins_out.empty()) return;
  nlohmann::json j = nlohmann::json::object();
  j["bnb"] = binnings_to_json(default_binnings(data, c.get<std::size_t>("bnb.bins", BnbConfig{}.bins)));
  j["af"] = binnings_to_json(default_binnings(data, c.get<std::size_t>("af.bins", AfConfig{}.bins)));
  j["ac"] = binnings_to_json(default_binnings(data, c.get<std::size_t>("ac.bins", 10)));
  write_text_file(rc.bins_out, j.dump(2) + "\n");
}

inline std::string dataset_label(const RunConfig& rc) {
  return std::filesystem::path(rc.data).stem().string();
}

struct JobFailure {
  std::string model;
  std::string session_id;
  std::string message;
};

inline void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& files,
                           const std::vector<JobFailure>& failures, std::size_t jobs) {
  nlohmann::json fail = nlohmann::json::array();
  for (const auto& f : failures) fail.push_back({{"model", f.model}, {"session_id", f.session_id}, {"error", f.message}});
  nlohmann::json j = {{"complete", false},
                      {"jobs_total", jobs},
                      {"jobs_failed", failures.size()},
                      {"files", files},
                      {"failures", fail}};
  write_text_file(dir / "MANIFEST", j.dump(2) + "\n");
}

inline int report_error(std::ostream& err, const std::exception& e, int code) {
  err << "error: " << e.what() << "\n";
  return code;
}

inline std::string format_rate(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

}  // namespace detail

/// Checks the dataset (and sessions, when given) and lists every violation.
inline int cmd_validate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  std::size_t problems = 0;
  auto report = [&](const std::string& file, const Error& e) {
    out << file << ": " << e.what() << "\n";
    ++problems;
  };
  try {
    detail::require_file(rc.schema, "--schema");
    detail::require_file(rc.data, "--data");
    if (!rc.sessions.empty()) detail::require_file(rc.sessions, "--sessions");
    const auto schema = load_schema(rc.schema);
    auto check = check_dataset(read_csv(rc.data), schema);
    for (const auto& v : check.violations) report(rc.data, v);
    if (!rc.sessions.empty()) {
      if (check.dataset) {
        for (const auto& v : check_sessions(read_csv(rc.sessions), *check.dataset).violations) report(rc.sessions, v);
      } else {
        out << rc.sessions << ": not checked (dataset is invalid)\n";
      }
    }
  } catch (const Error& e) {
    return detail::report_error(err, e, kExitInputError);
  }
  if (problems > 0) {
    out << problems << " violation(s)\n";
    return kExitInputError;
  }
  out << "ok\n";
  return kExitOk;
}

/// Replays every session under every model and writes records.jsonl,
/// summary.json and summary.csv into rc.out.
inline int cmd_bench(const RunConfig& rc, std::ostream& out, std::ostream& err, ModelFactory factory = {}) {
  Inputs in;
  std::unique_ptr<ModelContext> context;
  std::vector<std::size_t> kappas = rc.kappas;
  std::vector<std::size_t> scored;  // sessions with at least two events
  try {
    detail::check_model_names(rc.models);
    if (kappas.empty()) throw Error(ErrorKind::Config, "no kappa values");
    std::sort(kappas.begin(), kappas.end());
    kappas.erase(std::unique(kappas.begin(), kappas.end()), kappas.end());
    if (kappas.front() < 1) throw Error(ErrorKind::Config, "kappa must be >= 1");
    in = detail::load_inputs(rc);
    const Config config = detail::effective_config(rc);
    context = std::make_unique<ModelContext>(*in.data, config);
    for (const auto& m : rc.models) {
      if (!context->make(m)->capabilities().predicts) throw Error(ErrorKind::Config, "model '" + m + "' does not predict");
    }
    if (!factory) factory = [&](const std::string& name, std::size_t stream) { return context->make(name, stream); };
    for (std::size_t s = 0; s < in.sessions.size(); ++s) {
      if (in.sessions[s].events.size() >= 2) scored.push_back(s);
    }
    if (scored.empty()) throw Error(ErrorKind::EmptyHistory, "no session has two or more events");
    std::filesystem::create_directories(rc.out);
    detail::write_binnings(rc, *in.data, config);
  } catch (const std::exception& e) {
    return detail::report_error(err, e, kExitInputError);
  }

  const std::size_t jobs = rc.models.size() * scored.size();
  std::vector<std::vector<PredictionRecord>> results(jobs);
  std::vector<std::optional<std::string>> failed(jobs);
  run_parallel(jobs, rc.jobs, [&](std::size_t job) {
    const std::size_t mi = job / scored.size(), s = scored[job % scored.size()];
    try {
      auto model = factory(rc.models[mi], s);
      results[job] = replay(*in.data, in.sessions[s], *model, kappas);
      for (auto& r : results[job]) r.model = rc.models[mi];
    } catch (const std::exception& e) {
      results[job].clear();
      failed[job] = e.what();
    }
  });

  const std::filesystem::path dir(rc.out);
  std::vector<detail::JobFailure> failures;
  {
    std::ofstream jsonl(dir / "records.jsonl", std::ios::binary);
    for (std::size_t job = 0; job < jobs; ++job) {
      if (failed[job]) {
        failures.push_back({rc.models[job / scored.size()], in.sessions[scored[job % scored.size()]].session_id, *failed[job]});
      }
      for (const auto& r : results[job]) jsonl << to_json(r).dump() << "\n";
    }
  }

  nlohmann::json summary = {{"dataset", detail::dataset_label(rc)},
                            {"points", in.data->size()},
                            {"sessions", scored.size()},
                            {"sessions_skipped", in.sessions.size() - scored.size()},
                            {"seed", rc.seed},
                            {"kappas", kappas},
                            {"pooling", "pooled"},
                            {"models", nlohmann::json::object()}};
  std::ostringstream csv;
  write_csv_row(csv, {"dataset", "model", "kappa", "success_rate", "mean_rank", "predictions"});
  std::ostringstream table;
  table << std::left << std::setw(6) << "model";
  for (auto k : kappas) table << std::right << std::setw(9) << ("@" + std::to_string(k));
  table << std::right << std::setw(11) << "mean_rank" << "\n";

  for (std::size_t mi = 0; mi < rc.models.size(); ++mi) {
    const auto& name = rc.models[mi];
    std::vector<PredictionRecord> pooled;
    nlohmann::json per_session = nlohmann::json::object();
    bool complete = true;
    for (std::size_t si = 0; si < scored.size(); ++si) {
      const auto job = mi * scored.size() + si;
      if (failed[job]) complete = false;
      const auto& recs = results[job];
      if (recs.empty()) continue;
      nlohmann::json rates = nlohmann::json::object();
      for (auto k : kappas) rates[std::to_string(k)] = success_rate(recs, k);
      per_session[in.sessions[scored[si]].session_id] = {
          {"success", rates}, {"mean_rank", mean_rank(recs)}, {"predictions", recs.size()}};
      pooled.insert(pooled.end(), recs.begin(), recs.end());
    }
    nlohmann::json entry = {{"complete", complete}, {"predictions", pooled.size()}, {"sessions", per_session}};
    table << std::left << std::setw(6) << name;
    if (pooled.empty()) {
      entry["success"] = nlohmann::json::object();
      entry["mean_rank"] = nullptr;
      table << "  (failed)\n";
    } else {
      nlohmann::json rates = nlohmann::json::object();
      const double mr = mean_rank(pooled);
      for (auto k : kappas) {
        const double rate = success_rate(pooled, k);
        rates[std::to_string(k)] = rate;
        write_csv_row(csv, {detail::dataset_label(rc), name, std::to_string(k), format_number(rate), format_number(mr),
                            std::to_string(pooled.size())});
        table << std::right << std::setw(9) << detail::format_rate(rate);
      }
      entry["success"] = rates;
      entry["mean_rank"] = mr;
      table << std::right << std::setw(11) << detail::format_rate(mr) << "\n";
    }
    summary["models"][name] = std::move(entry);
  }

  try {
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    write_text_file(dir / "summary.csv", csv.str());
    if (!failures.empty()) {
      detail::write_manifest(dir, {"records.jsonl", "summary.json", "summary.csv"}, failures, jobs);
    } else {
      std::filesystem::remove(dir / "MANIFEST");
    }
  } catch (const std::exception& e) {
    return detail::report_error(err, e, kExitInputError);
  }
  out << table.str();
  if (!failures.empty()) {
    for (const auto& f : failures) err << "error: model '" << f.model << "' failed: " << f.message << "\n";
    return kExitModelFailure;
  }
  return kExitOk;
}

/// Runs every bias-detecting model over every session and writes
/// bias_timeline.jsonl into rc.out.
inline int cmd_bias(const RunConfig& rc, std::ostream& out, std::ostream& err, ModelFactory factory = {}) {
  Inputs in;
  std::unique_ptr<ModelContext> context;
  std::vector<AttributeGroup> groups;
  try {
    detail::check_model_names(rc.models);
    in = detail::load_inputs(rc);
    groups = parse_groups(rc.groups);
    const auto names = attribute_names(*in.data);
    for (const auto& g : groups) {
      for (const auto& m : g.members) {
        if (std::find(names.begin(), names.end(), m) == names.end()) {
          throw Error(ErrorKind::UnknownAttribute, "group '" + g.name + "' names unknown attribute '" + m + "'");
        }
      }
    }
    const Config config = detail::effective_config(rc);
    context = std::make_unique<ModelContext>(*in.data, config);
    for (const auto& m : rc.models) {
      if (!context->make(m)->capabilities().detects_bias) {
        throw Error(ErrorKind::Config, "model '" + m + "' does not detect bias");
      }
    }
    if (!factory) factory = [&](const std::string& name, std::size_t stream) { return context->make(name, stream); };
    std::filesystem::create_directories(rc.out);
    detail::write_binnings(rc, *in.data, config);
  } catch (const std::exception& e) {
    return detail::report_error(err, e, kExitInputError);
  }

  const std::size_t sessions = in.sessions.size();
  const std::size_t jobs = rc.models.size() * sessions;
  std::vector<std::vector<BiasTimelineRecord>> results(jobs);
  std::vector<std::optional<std::string>> failed(jobs);
  run_parallel(jobs, rc.jobs, [&](std::size_t job) {
    const std::size_t mi = job / sessions, s = job % sessions;
    try {
      auto model = factory(rc.models[mi], s);
      results[job] = bias_timeline(in.sessions[s], *model, groups);
      for (auto& r : results[job]) r.model = rc.models[mi];
    } catch (const std::exception& e) {
      results[job].clear();
      failed[job] = e.what();
    }
  });

  const std::filesystem::path dir(rc.out);
  std::vector<detail::JobFailure> failures;
  std::size_t rows = 0, flagged = 0;
  {
    std::ofstream jsonl(dir / "bias_timeline.jsonl", std::ios::binary);
    for (std::size_t job = 0; job < jobs; ++job) {
      if (failed[job]) failures.push_back({rc.models[job / sessions], in.sessions[job % sessions].session_id, *failed[job]});
      for (const auto& r : results[job]) {
        jsonl << to_json(r).dump() << "\n";
        ++rows;
        flagged += !r.assumption_ok;
      }
    }
  }
  try {
    if (!failures.empty()) {
      detail::write_manifest(dir, {"bias_timeline.jsonl"}, failures, jobs);
    } else {
      std::filesystem::remove(dir / "MANIFEST");
    }
  } catch (const std::exception& e) {
    return detail::report_error(err, e, kExitInputError);
  }
  out << rows << " timeline rows, " << flagged << " with a failed assumption check\n";
  if (!failures.empty()) {
    for (const auto& f : failures) err << "error: model '" << f.model << "' failed: " << f.message << "\n";
    return kExitModelFailure;
  }
  return kExitOk;
}

struct SynthOptions {
  std::size_t n = 2000;
  std::string schema;  // optional schema.json; the built-in schema otherwise
  std::string focus = "type=A";
  double noise = 0.1;
  std::size_t length = 20;
  std::size_t sessions = 30;
  std::uint64_t seed = 0;
  std::string out = ".";
};

/// Writes dataset.csv, sessions.csv, schema.json and ground_truth.json.
inline int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err) {
  try {
    std::vector<AttributeSchema> schema = default_synthetic_schema();
    if (!o.schema.empty()) {
      detail::require_file(o.schema, "--schema");
      schema = load_schema(o.schema);
    }
    const Dataset data = gen_dataset(o.n, schema, derive_seed(o.seed, 0));
    TaskSpec task;
    task.focus = parse_focus(data, o.focus);
    if (task.focus.empty()) throw Error(ErrorKind::Config, "empty --focus");
    task.noise = o.noise;
    task.length = o.length;
    task.sessions = o.sessions;
    task.seed = derive_seed(o.seed, 1);
    const auto sessions = gen_sessions(data, task);
    auto truth = ground_truth_json(task);
    truth["seed"] = o.seed;

    const std::filesystem::path dir(o.out);
    std::filesystem::create_directories(dir);
    std::ostringstream ds, ss;
    write_dataset_csv(ds, data);
    write_sessions_csv(ss, sessions);
    write_text_file(dir / "dataset.csv", ds.str());
    write_text_file(dir / "sessions.csv", ss.str());
    write_text_file(dir / "schema.json", schema_to_json(schema).dump(2) + "\n");
    write_text_file(dir / "ground_truth.json", truth.dump(2) + "\n");
    out << "wrote " << data.size() << " points and " << sessions.size() << " sessions to " << dir.string() << "\n";
  } catch (const std::exception& e) {
    return detail::report_error(err, e, kExitInputError);
  }
  return kExitOk;
}

}  // namespace usermodel
