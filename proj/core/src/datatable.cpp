//
// Copyright 2026 The NL2KQL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#include "nl2kql/datatable.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace nl2kql::engine {

namespace {

const char* const kTypes[] = {"string",   "long",     "real",   "bool",
                              "datetime", "timespan", "dynamic"};

bool is_known_type(const std::string& type) {
  return std::find(std::begin(kTypes), std::end(kTypes), type) !=
         std::end(kTypes);
}

DynamicNode from_json(const nlohmann::json& j) {
  DynamicNode node;
  if (j.is_null()) {
    node.kind = DynamicNode::Kind::Null;
  } else if (j.is_boolean()) {
    node.kind = DynamicNode::Kind::Bool;
    node.b = j.get<bool>();
  } else if (j.is_number_integer() || j.is_number_unsigned()) {
    node.kind = DynamicNode::Kind::Long;
    node.i = j.get<std::int64_t>();
  } else if (j.is_number_float()) {
    node.kind = DynamicNode::Kind::Double;
    node.d = j.get<double>();
  } else if (j.is_string()) {
    node.kind = DynamicNode::Kind::String;
    node.s = j.get<std::string>();
  } else if (j.is_array()) {
    node.kind = DynamicNode::Kind::Array;
    for (const auto& item : j) node.array.push_back(from_json(item));
  } else if (j.is_object()) {
    node.kind = DynamicNode::Kind::Object;
    for (const auto& [key, value] : j.items()) {
      node.object.emplace_back(key, from_json(value));
    }
    std::sort(node.object.begin(), node.object.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  return node;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) lines.push_back(current);
  return lines;
}

struct CsvCell {
  std::string text;
  bool quoted = false;
};

// One line of quoted CSV. Embedded quotes are doubled inside quoted cells.
bool split_csv(const std::string& line, std::vector<CsvCell>& out,
               std::string& error) {
  out.clear();
  CsvCell cell;
  std::size_t pos = 0;
  bool in_quotes = false;
  bool cell_started = false;
  while (pos < line.size()) {
    char c = line[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < line.size() && line[pos + 1] == '"') {
          cell.text.push_back('"');
          pos += 2;
          continue;
        }
        in_quotes = false;
        ++pos;
        continue;
      }
      cell.text.push_back(c);
      ++pos;
      continue;
    }
    if (c == '"' && !cell_started) {
      in_quotes = true;
      cell.quoted = true;
      cell_started = true;
      ++pos;
      continue;
    }
    if (c == ',') {
      out.push_back(std::move(cell));
      cell = {};
      cell_started = false;
      ++pos;
      continue;
    }
    if (c == '"') {
      error = "unexpected quote inside an unquoted cell";
      return false;
    }
    cell.text.push_back(c);
    cell_started = true;
    ++pos;
  }
  if (in_quotes) {
    error = "unterminated quoted cell";
    return false;
  }
  out.push_back(std::move(cell));
  return true;
}

}  // namespace

std::string format_cell(const CellValue& cell) {
  std::string body;
  switch (cell.type) {
    case CellValue::Type::Null:
      return "";  // empty unquoted cell
    case CellValue::Type::String:
      body = cell.s;
      break;
    case CellValue::Type::Long:
      body = std::to_string(cell.i);
      break;
    case CellValue::Type::Double: {
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), cell.d);
      body.assign(buf, ec == std::errc() ? end : buf);
      break;
    }
    case CellValue::Type::Bool:
      body = cell.b ? "true" : "false";
      break;
    case CellValue::Type::DateTime:
      body = format_datetime_micros(cell.i);
      break;
    case CellValue::Type::Timespan:
      body = std::to_string(cell.i / 1000) + "ms";
      break;
    case CellValue::Type::Dynamic:
      body = cell.dyn ? cell.dyn->canonical_text() : "null";
      break;
  }
  std::string out = "\"";
  for (char c : body) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

CellValue parse_cell(const std::string& text, bool quoted,
                     const std::string& type, std::string& error) {
  if (text.empty() && !quoted) return CellValue::null();
  if (type == "string") return CellValue::from_string(text);
  if (type == "long") {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      error = "'" + text + "' is not a long";
      return CellValue::null();
    }
    return CellValue::from_long(value);
  }
  if (type == "real") {
    char* end = nullptr;
    double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || text.empty()) {
      error = "'" + text + "' is not a real";
      return CellValue::null();
    }
    return CellValue::from_double(value);
  }
  if (type == "bool") {
    if (text == "true") return CellValue::from_bool(true);
    if (text == "false") return CellValue::from_bool(false);
    error = "'" + text + "' is not a bool";
    return CellValue::null();
  }
  if (type == "datetime") {
    auto micros = parse_datetime_micros(text);
    if (!micros) {
      error = "'" + text + "' is not a datetime";
      return CellValue::null();
    }
    return CellValue::datetime(*micros);
  }
  if (type == "timespan") {
    auto micros = parse_timespan_micros(text);
    if (!micros) {
      error = "'" + text + "' is not a timespan";
      return CellValue::null();
    }
    return CellValue::timespan(*micros);
  }
  if (type == "dynamic") {
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) {
      error = "dynamic cell is not valid JSON";
      return CellValue::null();
    }
    return CellValue::dynamic(from_json(j));
  }
  error = "unknown column type '" + type + "'";
  return CellValue::null();
}

DataTable parse_table_data(const std::string& text, const std::string& origin) {
  auto lines = split_lines(text);
  if (lines.size() < 2) {
    throw LoadError(origin + ": expected a table name line and a header line");
  }
  DataTable table;
  table.name = lines[0];
  if (table.name.empty()) {
    throw LoadError(origin + ": empty table name");
  }

  std::istringstream header(lines[1]);
  std::string part;
  while (std::getline(header, part, ',')) {
    auto colon = part.find(':');
    if (colon == std::string::npos) {
      throw LoadError(origin + ": header '" + part + "' is not name:type");
    }
    ColumnDef col{part.substr(0, colon), part.substr(colon + 1)};
    if (!is_known_type(col.type)) {
      throw LoadError(origin + ": unknown type '" + col.type + "' for column '" +
                      col.name + "'");
    }
    for (const auto& existing : table.columns) {
      if (existing.name == col.name) {
        throw LoadError(origin + ": duplicate column '" + col.name + "'");
      }
    }
    table.columns.push_back(std::move(col));
  }
  if (table.columns.empty()) {
    throw LoadError(origin + ": no columns declared");
  }

  for (std::size_t ln = 2; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    std::vector<CsvCell> cells;
    std::string error;
    if (!split_csv(lines[ln], cells, error)) {
      throw LoadError(origin + ":" + std::to_string(ln + 1) + ": " + error);
    }
    if (cells.size() != table.columns.size()) {
      throw LoadError(origin + ":" + std::to_string(ln + 1) + ": expected " +
                      std::to_string(table.columns.size()) + " cells, found " +
                      std::to_string(cells.size()));
    }
    std::vector<CellValue> row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::string cell_error;
      row.push_back(parse_cell(cells[c].text, cells[c].quoted,
                               table.columns[c].type, cell_error));
      if (!cell_error.empty()) {
        throw LoadError(origin + ":" + std::to_string(ln + 1) + ": column '" +
                        table.columns[c].name + "': " + cell_error);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

Database load_database(const std::vector<std::string>& paths) {
  Database db;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(path + ": cannot open");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    DataTable table = parse_table_data(buffer.str(), path);
    if (db.tables.count(table.name)) {
      throw LoadError(path + ": duplicate table '" + table.name + "'");
    }
    db.tables.emplace(table.name, std::move(table));
  }
  return db;
}

Schema Database::to_schema() const {
  Schema schema;
  for (const auto& [name, table] : tables) {
    TableDef def;
    def.name = name;
    def.columns = table.columns;
    schema.tables.push_back(std::move(def));
  }
  return schema;
}

const DataTable* Database::find(const std::string& name) const {
  auto it = tables.find(name);
  return it == tables.end() ? nullptr : &it->second;
}

}  // namespace nl2kql::engine
