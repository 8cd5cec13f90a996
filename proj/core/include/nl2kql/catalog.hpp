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
#ifndef NL2KQL_CATALOG_HPP_
#define NL2KQL_CATALOG_HPP_

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nl2kql/datatable.hpp"
#include "nl2kql/embed.hpp"
#include "nl2kql/llm.hpp"
#include "nl2kql/schema.hpp"
#include "nl2kql/vector_store.hpp"

namespace nl2kql::catalog {

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One literal value of an enum column. Empty description means absent.
struct CatalogValue {
  std::string value;
  std::string description;
};

struct CatalogColumn {
  std::string name;
  std::string type;         // string, long, real, bool, datetime, timespan, dynamic
  std::string description;  // empty = absent
  std::string format;       // "" or "Enum"
  std::vector<CatalogValue> values;  // non-empty only when format == "Enum"

  bool is_enum() const { return format == "Enum"; }
};

struct CatalogTable {
  std::string name;
  std::string description;
  std::vector<CatalogColumn> columns;  // names unique
  std::string extended_summary;        // empty = not yet generated

  const CatalogColumn* find_column(std::string_view column_name) const;
};

struct DataCatalog {
  std::string database;
  std::vector<CatalogTable> tables;  // names unique

  const CatalogTable* find_table(std::string_view table_name) const;

  // Name/type projection consumed by validation and execution. Every table
  // starts accessible; permission scoping happens downstream.
  Schema to_schema() const;
};

inline constexpr std::size_t kDefaultEnumCardinalityThreshold = 20;

// Parses and validates a catalog JSON document. `origin` names the source in
// error messages; violations report the offending path, e.g.
// "defender.json: Tables[3].Columns[2].Name: missing".
DataCatalog load_catalog(const std::string& json_text, const std::string& origin);
DataCatalog load_catalog_file(const std::string& path);

// Serializes back to the catalog file format (used after enrichment).
std::string catalog_to_json(const DataCatalog& catalog);

// Distinct non-null values of each string column whose cardinality stays
// within the threshold, sorted lexicographically; other columns absent.
std::map<std::string, std::vector<CatalogValue>> infer_enum_values(
    const engine::DataTable& samples,
    std::size_t cardinality_threshold = kDefaultEnumCardinalityThreshold);

// Marks the named columns Enum and attaches the inferred values.
void apply_enum_values(
    CatalogTable& table,
    const std::map<std::string, std::vector<CatalogValue>>& inferred);

// Deterministic stand-in summary: "<Name>. <Description> Columns: a, b, c".
// The description segment disappears cleanly when empty.
std::string fallback_table_summary(const CatalogTable& table);

// Instruction sent to the chat model; always carries the table name,
// description, and the full column listing.
std::string extended_summary_prompt(const CatalogTable& table);

// Asks the model for a summary, stores it on the table, and returns it.
// Transport failures fall back to fallback_table_summary, so this never
// throws for llm reasons.
std::string table_extended_summary(CatalogTable& table, llm::ChatClient& client);

// "<table> <column> <value> <description?>" single-space joined; the trailing
// segment is omitted when the description is empty.
std::string value_summary(const std::string& table, const std::string& column,
                          const CatalogValue& value);

// Text embedded for a column entry: "<table> <column> <type> <description?>".
std::string column_summary(const std::string& table, const CatalogColumn& column);

// Embeds every table (extended summary when present, else fallback), every
// enum value, and every column into one store. Payloads hold the embedded
// source text; keys identify the element (see vector_store.hpp key builders).
embed::VectorStore build_catalog_store(const DataCatalog& catalog,
                                       embed::EmbeddingProvider& provider);

}  // namespace nl2kql::catalog

#endif  // NL2KQL_CATALOG_HPP_
