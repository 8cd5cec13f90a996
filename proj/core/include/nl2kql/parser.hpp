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
#ifndef NL2KQL_PARSER_HPP_
#define NL2KQL_PARSER_HPP_

#include <string_view>
#include <vector>

#include "nl2kql/ast.hpp"
#include "nl2kql/diagnostics.hpp"
#include "nl2kql/lexer.hpp"

namespace nl2kql::kql {

struct ParseResult {
  Query query;
  std::vector<Diagnostic> diagnostics;
  std::vector<Token> tokens;  // lossless stream, trivia included

  bool syntactically_correct() const { return !has_syntax_errors(diagnostics); }
};

// Parses a KQL pipeline. Always returns a best-effort AST; malformed input
// is reported through syntax diagnostics rather than exceptions.
ParseResult parse(std::string_view text);

}  // namespace nl2kql::kql

#endif  // NL2KQL_PARSER_HPP_
