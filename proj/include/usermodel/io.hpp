#pragma once

// File-level loaders and writers for the dataset, schema and session formats.
//
//   dataset.csv   point_id,<attr>,...
//   sessions.csv  session_id,t,point_id,action
//   schema.json   {"attributes":[{"name","kind","categories"?,"visualized"}]}

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "usermodel/core.hpp"
#include "usermodel/csv.hpp"
#include "usermodel/validate.hpp"

namespace usermodel {

using json = nlohmann::json;

inline std::vector<AttributeSchema> schema_from_json(const json& j) {
  if (!j.is_object() || !j.contains("attributes") || !j["attributes"].is_array()) {
    throw Error(ErrorKind::InvalidSchema, "expected an object with an 'attributes' array");
  }
  std::vector<AttributeSchema> schema;
  for (const auto& item : j["attributes"]) {
    if (!item.is_object() || !item.contains("name") || !item.contains("kind")) {
      throw Error(ErrorKind::InvalidSchema, "attribute entries need 'name' and 'kind'");
    }
    AttributeSchema a;
    a.name = item["name"].get<std::string>();
    a.kind = parse_attribute_kind(item["kind"].get<std::string>());
    if (item.contains("categories")) a.categories = item["categories"].get<std::vector<std::string>>();
    a.visualized = item.value("visualized", true);
    schema.push_back(std::move(a));
  }
  check_schema(schema);
  return schema;
}

inline json schema_to_json(const std::vector<AttributeSchema>& schema) {
  json attrs = json::array();
  for (const auto& a : schema) {
    json item = {{"name", a.name}, {"kind", std::string(to_string(a.kind))}};
    if (a.discrete()) item["categories"] = a.categories;
    item["visualized"] = a.visualized;
    attrs.push_back(std::move(item));
  }
  return json{{"attributes", std::move(attrs)}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Io, "'" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << text;
}

inline std::vector<AttributeSchema> load_schema(const std::string& path) {
  return schema_from_json(read_json_file(path));
}

inline Dataset load_dataset(const std::string& path, const std::vector<AttributeSchema>& schema) {
  return validate_dataset(read_csv(path), schema);
}

inline std::vector<Session> load_sessions(const std::string& path, const Dataset& data) {
  return validate_sessions(read_csv(path), data);
}

inline void write_dataset_csv(std::ostream& out, const Dataset& data) {
  std::vector<std::string> cells{"point_id"};
  for (const auto& a : data.schema()) cells.push_back(a.name);
  write_csv_row(out, cells);
  for (std::size_t i = 0; i < data.size(); ++i) {
    cells.assign(1, data.id(i));
    for (std::size_t j = 0; j < data.dims(); ++j) cells.push_back(data.format_value(i, j));
    write_csv_row(out, cells);
  }
}

inline void write_sessions_csv(std::ostream& out, const std::vector<Session>& sessions) {
  write_csv_row(out, {"session_id", "t", "point_id", "action"});
  for (const auto& s : sessions) {
    for (const auto& e : s.events) {
      write_csv_row(out, {s.session_id, std::to_string(e.t), e.point_id, e.action});
    }
  }
}

}  // namespace usermodel
