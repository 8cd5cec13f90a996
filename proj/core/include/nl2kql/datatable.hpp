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
#ifndef NL2KQL_DATATABLE_HPP_
#define NL2KQL_DATATABLE_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nl2kql/cell.hpp"
#include "nl2kql/schema.hpp"

namespace nl2kql::engine {

class LoadError : public std::runtime_error {
 public:
  explicit LoadError(const std::string& message)
      : std::runtime_error(message) {}
};

struct DataTable {
  std::string name;
  std::vector<ColumnDef> columns;  // declared types
  std::vector<std::vector<CellValue>> rows;
};

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<CellValue>> rows;
};

struct Database {
  std::map<std::string, DataTable> tables;
  // Reference instant for now()/ago(); fixed so execution is reproducible.
  std::int64_t now_micros = 1704067200000000;  // 2024-01-01T00:00:00Z

  Schema to_schema() const;
  const DataTable* find(const std::string& name) const;
};

// Parses one table-data document. Format, line by line:
//   1: table name
//   2: comma-separated `name:type` headers
//      (types: string, long, real, bool, datetime, timespan, dynamic)
//   3+: one row per line in quoted-CSV: cells separated by commas, a cell may
//      be wrapped in double quotes with embedded quotes doubled; an empty
//      unquoted cell is null, an empty quoted cell is the empty string.
//      dynamic cells hold JSON text; datetime cells hold ISO-8601 UTC text;
//      timespan cells hold a KQL literal body such as `90m`.
// `origin` names the document in errors.
DataTable parse_table_data(const std::string& text, const std::string& origin);

// Loads each file as one table. Throws LoadError on format or type problems
// (naming file, row, and column) and on duplicate table names.
Database load_database(const std::vector<std::string>& paths);

// Cell encoder/decoder used by the table-data format.
std::string format_cell(const CellValue& cell);
CellValue parse_cell(const std::string& text, bool quoted,
                     const std::string& type, std::string& error);

}  // namespace nl2kql::engine

#endif  // NL2KQL_DATATABLE_HPP_
