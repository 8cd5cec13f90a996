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
#include "nl2kql/catalog.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace nl2kql::catalog {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::set<std::string>& known_types() {
  static const std::set<std::string> types{
      "string", "long", "real", "bool", "datetime", "timespan", "dynamic"};
  return types;
}

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& what) {
  throw CatalogError(origin + ": " + path + ": " + what);
}

const json& require_object(const json& node, const std::string& origin,
                           const std::string& path) {
  if (!node.is_object()) fail(origin, path, "expected an object");
  return node;
}

const json& require_member(const json& obj, const char* key,
                           const std::string& origin, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(origin, path + "." + key, "missing");
  return *it;
}

std::string require_string(const json& obj, const char* key,
                           const std::string& origin, const std::string& path,
                           bool allow_empty) {
  const json& node = require_member(obj, key, origin, path);
  if (!node.is_string()) fail(origin, path + "." + key, "expected a string");
  std::string value = node.get<std::string>();
  if (!allow_empty && value.empty()) {
    fail(origin, path + "." + key, "must be non-empty");
  }
  return value;
}

std::string optional_string(const json& obj, const char* key,
                            const std::string& origin, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) return {};
  if (!it->is_string()) fail(origin, path + "." + key, "expected a string");
  return it->get<std::string>();
}

CatalogValue parse_value(const json& node, const std::string& origin,
                         const std::string& path) {
  require_object(node, origin, path);
  CatalogValue value;
  value.value = require_string(node, "Value", origin, path, false);
  value.description = optional_string(node, "Description", origin, path);
  return value;
}

CatalogColumn parse_column(const json& node, const std::string& origin,
                           const std::string& path) {
  require_object(node, origin, path);
  CatalogColumn column;
  column.name = require_string(node, "Name", origin, path, false);
  column.type = require_string(node, "Type", origin, path, false);
  if (known_types().count(column.type) == 0) {
    fail(origin, path + ".Type", "unknown type '" + column.type + "'");
  }
  column.description = optional_string(node, "Description", origin, path);
  column.format = optional_string(node, "Format", origin, path);
  if (!column.format.empty() && column.format != "Enum") {
    fail(origin, path + ".Format", "only 'Enum' is supported");
  }
  const auto values_it = node.find("Values");
  if (values_it != node.end()) {
    if (!column.is_enum()) {
      fail(origin, path + ".Values",
           "values are only allowed when Format is 'Enum'");
    }
    if (!values_it->is_array()) {
      fail(origin, path + ".Values", "expected an array");
    }
    for (std::size_t k = 0; k < values_it->size(); ++k) {
      column.values.push_back(parse_value(
          (*values_it)[k], origin, path + ".Values[" + std::to_string(k) + "]"));
    }
  }
  return column;
}

CatalogTable parse_table(const json& node, const std::string& origin,
                         const std::string& path) {
  require_object(node, origin, path);
  CatalogTable table;
  table.name = require_string(node, "Name", origin, path, false);
  const json& description = require_member(node, "Description", origin, path);
  if (!description.is_string()) {
    fail(origin, path + ".Description", "expected a string");
  }
  table.description = description.get<std::string>();
  table.extended_summary = optional_string(node, "ExtendedSummary", origin, path);

  const json& columns = require_member(node, "Columns", origin, path);
  if (!columns.is_array()) fail(origin, path + ".Columns", "expected an array");
  std::set<std::string> seen;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const std::string column_path = path + ".Columns[" + std::to_string(j) + "]";
    CatalogColumn column = parse_column(columns[j], origin, column_path);
    if (!seen.insert(column.name).second) {
      fail(origin, column_path + ".Name",
           "duplicate column '" + column.name + "'");
    }
    table.columns.push_back(std::move(column));
  }
  return table;
}

std::string join_names(const std::vector<CatalogColumn>& columns) {
  std::string out;
  for (const CatalogColumn& column : columns) {
    if (!out.empty()) out += ", ";
    out += column.name;
  }
  return out;
}

}  // namespace

const CatalogColumn* CatalogTable::find_column(
    std::string_view column_name) const {
  for (const CatalogColumn& column : columns) {
    if (column.name == column_name) return &column;
  }
  return nullptr;
}

const CatalogTable* DataCatalog::find_table(std::string_view table_name) const {
  for (const CatalogTable& table : tables) {
    if (table.name == table_name) return &table;
  }
  return nullptr;
}

Schema DataCatalog::to_schema() const {
  Schema schema;
  schema.tables.reserve(tables.size());
  for (const CatalogTable& table : tables) {
    TableDef def;
    def.name = table.name;
    for (const CatalogColumn& column : table.columns) {
      def.columns.push_back(ColumnDef{column.name, column.type});
    }
    schema.tables.push_back(std::move(def));
  }
  return schema;
}

DataCatalog load_catalog(const std::string& json_text,
                         const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw CatalogError(origin + ": invalid JSON: " + e.what());
  }
  require_object(doc, origin, "$");

  DataCatalog catalog;
  catalog.database = require_string(doc, "Database", origin, "$", false);
  const json& tables = require_member(doc, "Tables", origin, "$");
  if (!tables.is_array()) fail(origin, "$.Tables", "expected an array");

  std::set<std::string> seen;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const std::string table_path = "Tables[" + std::to_string(i) + "]";
    CatalogTable table = parse_table(tables[i], origin, table_path);
    if (!seen.insert(table.name).second) {
      fail(origin, table_path + ".Name", "duplicate table '" + table.name + "'");
    }
    catalog.tables.push_back(std::move(table));
  }
  return catalog;
}

DataCatalog load_catalog_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CatalogError("cannot read catalog file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_catalog(buffer.str(), path);
}

std::string catalog_to_json(const DataCatalog& catalog) {
  ordered_json doc;
  doc["Database"] = catalog.database;
  doc["Tables"] = ordered_json::array();
  for (const CatalogTable& table : catalog.tables) {
    ordered_json t;
    t["Name"] = table.name;
    t["Description"] = table.description;
    if (!table.extended_summary.empty()) {
      t["ExtendedSummary"] = table.extended_summary;
    }
    t["Columns"] = ordered_json::array();
    for (const CatalogColumn& column : table.columns) {
      ordered_json c;
      c["Name"] = column.name;
      c["Type"] = column.type;
      if (!column.description.empty()) c["Description"] = column.description;
      if (!column.format.empty()) c["Format"] = column.format;
      if (!column.values.empty()) {
        c["Values"] = ordered_json::array();
        for (const CatalogValue& value : column.values) {
          ordered_json v;
          v["Value"] = value.value;
          if (!value.description.empty()) v["Description"] = value.description;
          c["Values"].push_back(std::move(v));
        }
      }
      t["Columns"].push_back(std::move(c));
    }
    doc["Tables"].push_back(std::move(t));
  }
  return doc.dump(2) + "\n";
}

std::map<std::string, std::vector<CatalogValue>> infer_enum_values(
    const engine::DataTable& samples, std::size_t cardinality_threshold) {
  std::map<std::string, std::vector<CatalogValue>> out;
  for (std::size_t c = 0; c < samples.columns.size(); ++c) {
    if (samples.columns[c].type != "string") continue;
    std::set<std::string> distinct;
    bool overflow = false;
    for (const auto& row : samples.rows) {
      const engine::CellValue& cell = row[c];
      if (cell.is_null()) continue;
      distinct.insert(cell.s);
      if (distinct.size() > cardinality_threshold) {
        overflow = true;
        break;
      }
    }
    if (overflow || distinct.empty()) continue;
    std::vector<CatalogValue> values;
    values.reserve(distinct.size());
    for (const std::string& v : distinct) values.push_back(CatalogValue{v, ""});
    out.emplace(samples.columns[c].name, std::move(values));
  }
  return out;
}

void apply_enum_values(
    CatalogTable& table,
    const std::map<std::string, std::vector<CatalogValue>>& inferred) {
  for (const auto& [name, values] : inferred) {
    if (values.empty()) continue;
    bool found = false;
    for (CatalogColumn& column : table.columns) {
      if (column.name != name) continue;
      column.format = "Enum";
      column.values = values;
      found = true;
      break;
    }
    if (!found) {
      throw CatalogError("apply_enum_values: table '" + table.name +
                         "' has no column '" + name + "'");
    }
  }
}

std::string fallback_table_summary(const CatalogTable& table) {
  std::string out = table.name + ".";
  if (!table.description.empty()) out += " " + table.description;
  out += " Columns: " + join_names(table.columns);
  return out;
}

std::string extended_summary_prompt(const CatalogTable& table) {
  std::string prompt =
      "Write an extended summary of the following database table for a "
      "security analyst. Cover what the table contains and the investigation "
      "scenarios it is useful for. Reply with the summary text only.\n\n";
  prompt += "Table: " + table.name + "\n";
  prompt += "Description: " + table.description + "\n";
  prompt += "Columns:\n";
  for (const CatalogColumn& column : table.columns) {
    prompt += "- " + column.name + " (" + column.type + ")";
    if (!column.description.empty()) prompt += ": " + column.description;
    prompt += "\n";
  }
  return prompt;
}

std::string table_extended_summary(CatalogTable& table,
                                   llm::ChatClient& client) {
  try {
    const std::vector<llm::ChatMessage> messages{
        {"system", "You are an expert on security data catalogs."},
        {"user", extended_summary_prompt(table)}};
    std::string summary = client.complete(messages);
    // Strip surrounding whitespace; an all-whitespace answer is a failure.
    const auto begin = summary.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) throw llm::TransportError("empty completion");
    const auto end = summary.find_last_not_of(" \t\r\n");
    table.extended_summary = summary.substr(begin, end - begin + 1);
  } catch (const llm::TransportError&) {
    table.extended_summary = fallback_table_summary(table);
  }
  return table.extended_summary;
}

std::string value_summary(const std::string& table, const std::string& column,
                          const CatalogValue& value) {
  std::string out = table + " " + column + " " + value.value;
  if (!value.description.empty()) out += " " + value.description;
  return out;
}

std::string column_summary(const std::string& table,
                           const CatalogColumn& column) {
  std::string out = table + " " + column.name + " " + column.type;
  if (!column.description.empty()) out += " " + column.description;
  return out;
}

embed::VectorStore build_catalog_store(const DataCatalog& catalog,
                                       embed::EmbeddingProvider& provider) {
  struct Pending {
    std::string key;
    embed::PayloadKind kind;
    std::string text;
  };
  std::vector<Pending> pending;
  for (const CatalogTable& table : catalog.tables) {
    const std::string table_text = table.extended_summary.empty()
                                       ? fallback_table_summary(table)
                                       : table.extended_summary;
    pending.push_back({embed::table_key(table.name), embed::PayloadKind::Table,
                       table_text});
    for (const CatalogColumn& column : table.columns) {
      pending.push_back({embed::column_key(table.name, column.name),
                         embed::PayloadKind::Column,
                         column_summary(table.name, column)});
      for (const CatalogValue& value : column.values) {
        pending.push_back({embed::value_key(table.name, column.name, value.value),
                           embed::PayloadKind::Value,
                           value_summary(table.name, column.name, value)});
      }
    }
  }

  std::vector<std::string> texts;
  texts.reserve(pending.size());
  for (const Pending& p : pending) texts.push_back(p.text);
  const std::vector<embed::Vector> vectors = provider.embed_batch(texts);
  if (vectors.size() != pending.size()) {
    throw embed::EmbedError("catalog store: provider returned " +
                            std::to_string(vectors.size()) + " vectors for " +
                            std::to_string(pending.size()) + " texts");
  }

  embed::VectorStore store(provider.dimension(), provider.id());
  for (std::size_t i = 0; i < pending.size(); ++i) {
    store.add(pending[i].key, pending[i].kind, pending[i].text, vectors[i]);
  }
  return store;
}

}  // namespace nl2kql::catalog
