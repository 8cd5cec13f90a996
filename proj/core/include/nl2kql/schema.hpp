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
#ifndef NL2KQL_SCHEMA_HPP_
#define NL2KQL_SCHEMA_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace nl2kql {

// Minimal schema view used by semantic validation and execution. The catalog
// module builds one of these from its richer table metadata.
struct ColumnDef {
  std::string name;
  std::string type;  // string, long, real, bool, datetime, timespan, dynamic
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
  // Tables outside the caller's permission scope stay in the schema so they
  // can be reported as inaccessible rather than unknown.
  bool accessible = true;

  const ColumnDef* find_column(std::string_view column_name) const;
};

struct Schema {
  std::vector<TableDef> tables;

  const TableDef* find_table(std::string_view table_name) const;
};

}  // namespace nl2kql

#endif  // NL2KQL_SCHEMA_HPP_
