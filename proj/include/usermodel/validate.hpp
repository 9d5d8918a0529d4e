#pragma once

// Turns raw CSV tables into validated Dataset / Session values. Each checker
// has a collecting form (every violation, used by `validate`) and a throwing
// form (first violation).

#include <charconv>
#include <map>
#include <string>
#include <system_error>
#include <vector>

#include "usermodel/core.hpp"
#include "usermodel/csv.hpp"

namespace usermodel {

namespace detail {

inline std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> parse_int(const std::string& s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::string cell_ref(std::size_t row, const std::string& column) {
  return "row " + std::to_string(row) + ", column '" + column + "'";
}

}  // namespace detail

struct DatasetCheck {
  std::vector<Error> violations;
  std::optional<Dataset> dataset;  // set iff violations is empty
};

/// Rows are numbered from 1 (the first line after the header).
inline DatasetCheck check_dataset(const RawTable& raw, const std::vector<AttributeSchema>& schema) {
  DatasetCheck out;
  try {
    check_schema(schema);
  } catch (const Error& e) {
    out.violations.push_back(e);
    return out;
  }

  const auto id_col = raw.column("point_id");
  if (!id_col) out.violations.emplace_back(ErrorKind::MissingColumn, "column 'point_id'");
  std::vector<std::size_t> cols;
  for (const auto& a : schema) {
    auto c = raw.column(a.name);
    if (!c) {
      out.violations.emplace_back(ErrorKind::MissingColumn, "column '" + a.name + "'");
    } else {
      cols.push_back(*c);
    }
  }
  if (!out.violations.empty()) return out;
  if (raw.rows.empty()) {
    out.violations.emplace_back(ErrorKind::InvalidArgument, "dataset has no rows");
    return out;
  }

  const std::size_t d = schema.size();
  std::vector<std::string> ids;
  std::vector<double> values;
  ids.reserve(raw.rows.size());
  values.reserve(raw.rows.size() * d);
  std::map<std::string, std::size_t> first_row;

  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto& row = raw.rows[r];
    const std::size_t rowno = r + 1;
    if (row.size() != raw.header.size()) {
      out.violations.emplace_back(ErrorKind::MissingColumn,
                                  "row " + std::to_string(rowno) + " has " +
                                      std::to_string(row.size()) + " cells, header has " +
                                      std::to_string(raw.header.size()));
      continue;
    }
    const std::string& id = row[*id_col];
    if (id.empty()) {
      out.violations.emplace_back(ErrorKind::MissingColumn, detail::cell_ref(rowno, "point_id") + " is empty");
    } else if (auto [it, fresh] = first_row.emplace(id, rowno); !fresh) {
      out.violations.emplace_back(ErrorKind::DuplicateId,
                                  "point_id '" + id + "' at row " + std::to_string(rowno) +
                                      " (first seen at row " + std::to_string(it->second) + ")");
    }
    ids.push_back(id);
    for (std::size_t j = 0; j < d; ++j) {
      const auto& a = schema[j];
      const std::string& cell = row[cols[j]];
      if (a.discrete()) {
        auto idx = a.category_index(cell);
        if (!idx) {
          out.violations.emplace_back(ErrorKind::UnknownCategory,
                                      detail::cell_ref(rowno, a.name) + ": '" + cell + "'");
          values.push_back(0.0);
        } else {
          values.push_back(static_cast<double>(*idx));
        }
      } else {
        auto v = detail::parse_double(cell);
        if (!v || !std::isfinite(*v)) {
          out.violations.emplace_back(ErrorKind::NonFiniteValue,
                                      detail::cell_ref(rowno, a.name) + ": '" + cell + "'");
          values.push_back(0.0);
        } else {
          values.push_back(*v);
        }
      }
    }
  }
  if (out.violations.empty()) out.dataset.emplace(schema, std::move(ids), std::move(values));
  return out;
}

inline Dataset validate_dataset(const RawTable& raw, const std::vector<AttributeSchema>& schema) {
  auto check = check_dataset(raw, schema);
  if (!check.violations.empty()) throw check.violations.front();
  return std::move(*check.dataset);
}

struct SessionCheck {
  std::vector<Error> violations;
  std::vector<Session> sessions;  // sorted by session_id; complete iff violations is empty
};

/// Groups rows by session_id, orders each session by t and resolves point ids.
inline SessionCheck check_sessions(const RawTable& raw, const Dataset& data) {
  SessionCheck out;
  const auto sid_col = raw.column("session_id");
  const auto t_col = raw.column("t");
  const auto pid_col = raw.column("point_id");
  const auto act_col = raw.column("action");
  for (auto [col, name] : {std::pair{sid_col, "session_id"}, std::pair{t_col, "t"},
                           std::pair{pid_col, "point_id"}}) {
    if (!col) out.violations.emplace_back(ErrorKind::MissingColumn, std::string("column '") + name + "'");
  }
  if (!out.violations.empty()) return out;

  std::map<std::string, std::vector<std::pair<std::size_t, InteractionEvent>>> grouped;
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto& row = raw.rows[r];
    const std::size_t rowno = r + 1;
    if (row.size() != raw.header.size()) {
      out.violations.emplace_back(ErrorKind::MissingColumn,
                                  "row " + std::to_string(rowno) + " has wrong cell count");
      continue;
    }
    InteractionEvent ev;
    ev.point_id = row[*pid_col];
    auto t = detail::parse_int(row[*t_col]);
    if (!t || *t < 1) {
      out.violations.emplace_back(ErrorKind::NonMonotonicTime,
                                  detail::cell_ref(rowno, "t") + ": '" + row[*t_col] +
                                      "' is not an integer >= 1");
      continue;
    }
    ev.t = *t;
    if (act_col && !row[*act_col].empty()) ev.action = row[*act_col];
    auto idx = data.find(ev.point_id);
    if (!idx) {
      out.violations.emplace_back(ErrorKind::UnknownPoint,
                                  detail::cell_ref(rowno, "point_id") + ": '" + ev.point_id + "'");
      continue;
    }
    ev.point = *idx;
    grouped[row[*sid_col]].emplace_back(rowno, std::move(ev));
  }

  for (auto& [sid, rows] : grouped) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.second.t < b.second.t; });
    Session s;
    s.session_id = sid;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0 && rows[i].second.t == rows[i - 1].second.t) {
        out.violations.emplace_back(ErrorKind::NonMonotonicTime,
                                    "session '" + sid + "' repeats t=" +
                                        std::to_string(rows[i].second.t) + " (row " +
                                        std::to_string(rows[i].first) + ")");
      }
      s.events.push_back(rows[i].second);
    }
    out.sessions.push_back(std::move(s));
  }
  return out;
}

inline std::vector<Session> validate_sessions(const RawTable& raw, const Dataset& data) {
  auto check = check_sessions(raw, data);
  if (!check.violations.empty()) throw check.violations.front();
  return std::move(check.sessions);
}

/// Single-session form: all rows must belong to one session.
inline Session validate_session(const RawTable& raw, const Dataset& data) {
  auto sessions = validate_sessions(raw, data);
  if (sessions.size() != 1) {
    throw Error(ErrorKind::InvalidArgument,
                "expected one session, found " + std::to_string(sessions.size()));
  }
  return std::move(sessions.front());
}

}  // namespace usermodel
