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
#ifndef NL2KQL_RENDER_HPP_
#define NL2KQL_RENDER_HPP_

#include <string>

#include "nl2kql/ast.hpp"

namespace nl2kql::kql {

// Renders a query in canonical form: let statements and the source on their
// own lines, one stage per line, nested queries on a single line. Rendering
// a parsed query and reparsing it yields a structurally equal AST.
std::string render(const Query& query);

// Canonical single-line form of an expression.
std::string render_expr(const Expr& expr);

// Structural fingerprint of the AST. Two queries are structurally equal if
// and only if their dumps are byte-identical. Spans are excluded.
std::string dump(const Query& query);

bool structurally_equal(const Query& a, const Query& b);

}  // namespace nl2kql::kql

#endif  // NL2KQL_RENDER_HPP_
