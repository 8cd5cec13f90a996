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
#ifndef NL2KQL_ANALYSIS_HPP_
#define NL2KQL_ANALYSIS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "nl2kql/ast.hpp"
#include "nl2kql/diagnostics.hpp"
#include "nl2kql/schema.hpp"

namespace nl2kql::kql {

// Semantic validation against a schema: table and column resolution, let
// binding scopes, aggregate placement, join conditions. Returns only
// Severity::Semantic diagnostics; syntax problems are the parser's job.
std::vector<Diagnostic> validate(const Query& query, const Schema& schema);

// Catalog table names the query reads from, sorted and deduplicated. Names
// bound by let statements are not included, but tables referenced inside
// their definitions are.
std::vector<std::string> extract_tables(const Query& query);

// Column names referenced in where stages anywhere in the query, sorted and
// deduplicated. `$left.X` and `$right.X` count as `X`; a property access path
// counts its root column.
std::vector<std::string> extract_filter_columns(const Query& query);

// Literal values appearing in where stages, sorted and deduplicated. Strings
// are decoded, numbers are canonicalized (100.0 and 100 compare equal),
// booleans are `true`/`false`, datetime and timespan literals keep their
// source spelling.
std::vector<std::string> extract_filter_literals(const Query& query);

// Canonical text of a number literal: lowercased, leading zeros and trailing
// fractional zeros removed.
std::string canonical_number_text(std::string_view text);

bool is_aggregate_function(std::string_view name);

// Column name an unnamed summarize aggregate produces: count() -> count_,
// avg(Price) -> avg_Price.
std::string aggregate_auto_name(const Expr& call);

// Column name an unnamed projection or by-key produces. Column references
// keep their name, calls take the name of their first column argument,
// anything else is Column<index+1>.
std::string projected_auto_name(const Expr& expr, std::size_t index);

// Output column names of a join: left columns first, then right columns with
// integer suffixes where the name is already taken (X, X1, X2, ...).
// right_names[i] is the output name of right column i.
struct JoinColumnMerge {
  std::vector<std::string> merged;
  std::vector<std::string> right_names;
};
JoinColumnMerge merge_join_columns(const std::vector<std::string>& left,
                                   const std::vector<std::string>& right);

// Column names a query produces when run against the schema, best effort.
std::vector<std::string> output_columns(const Query& query,
                                        const Schema& schema);

}  // namespace nl2kql::kql

#endif  // NL2KQL_ANALYSIS_HPP_
