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
#ifndef NL2KQL_DIAGNOSTICS_HPP_
#define NL2KQL_DIAGNOSTICS_HPP_

#include <string>
#include <vector>

#include "nl2kql/token.hpp"

namespace nl2kql::kql {

enum class Severity { Syntax, Semantic };

// Stable diagnostic codes. These are part of the public contract: repair
// rules and tests match on the code, never on the message text.
//
// Syntax codes:
//   unterminated-string     string literal missing its closing quote
//   unexpected-token        token does not fit the grammar at this point
//   unknown-operator        unrecognized token after a pipe
//   unbalanced-paren        missing closing parenthesis or bracket
//   dangling-pipe           pipe with no stage after it
//   empty-query             no source table expression
//   between-missing-parens  `between lo .. hi` written without parentheses
//   bare-assignment-stage   `| Name = expr` used as a stage
//   unknown-join-kind       join kind= value is not a known join flavor
//   bad-let                 malformed let statement
//
// Semantic codes:
//   unknown-table               referenced table is not in the schema
//   inaccessible-table          table exists but is outside the user's scope
//   unknown-column              column does not resolve in the current scope
//   aggregate-outside-summarize aggregation call outside a summarize stage
//   nested-aggregate            aggregation call inside another aggregation
//   join-non-equality           join condition is not a plain equality
//   between-missing-range       between operand is not a low .. high pair
struct Diagnostic {
  Severity severity = Severity::Syntax;
  std::string code;
  std::string message;
  Span span;
  // The unresolved table/column name for semantic errors, when applicable.
  std::string related_identifier;
};

inline bool has_syntax_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Severity::Syntax) return true;
  }
  return false;
}

inline bool has_semantic_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Severity::Semantic) return true;
  }
  return false;
}

}  // namespace nl2kql::kql

#endif  // NL2KQL_DIAGNOSTICS_HPP_
