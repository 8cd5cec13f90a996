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
#ifndef NL2KQL_ENGINE_HPP_
#define NL2KQL_ENGINE_HPP_

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nl2kql/ast.hpp"
#include "nl2kql/datatable.hpp"

namespace nl2kql::engine {

// Typed runtime failure: type mismatch, unknown table at runtime, or a
// construct the engine refuses to evaluate (it never guesses).
class ExecutionError : public std::runtime_error {
 public:
  explicit ExecutionError(const std::string& message)
      : std::runtime_error(message) {}
};

// Evaluates a parsed query against an immutable database. Deterministic:
// equal inputs produce identical results, including row order. Throws
// ExecutionError; never returns a wrong answer for unsupported constructs.
ResultTable execute(const kql::Query& query, const Database& db);

// Canonical signature of one row: `name=value` pairs sorted by column name,
// joined with the 0x1f separator. Values use CellValue::canonical_text.
std::string row_signature(const std::vector<std::string>& columns,
                          const std::vector<CellValue>& row);

// Set of row signatures; duplicate rows collapse.
std::set<std::string> row_signatures(const ResultTable& result);

std::set<std::string> result_columns(const ResultTable& result);

}  // namespace nl2kql::engine

#endif  // NL2KQL_ENGINE_HPP_
