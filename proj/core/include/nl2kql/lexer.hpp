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
#ifndef NL2KQL_LEXER_HPP_
#define NL2KQL_LEXER_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "nl2kql/diagnostics.hpp"
#include "nl2kql/token.hpp"

namespace nl2kql::kql {

// Lossless tokenizer. Whitespace and comments become tokens of their own, so
// concatenating every token's text reproduces the input byte-for-byte.
// Malformed input never aborts the scan; it is reported through diagnostics
// and covered by a best-effort token.
std::vector<Token> tokenize(std::string_view text,
                            std::vector<Diagnostic>& diagnostics);

// True for the fixed set of structural keywords (case-sensitive lowercase).
bool is_keyword(std::string_view word);

// Decodes a string literal token's content: strips the quotes and resolves
// backslash escapes. `text` must be the exact token text.
std::string decode_string_literal(std::string_view text);

// Strips the [' '] / [" "] wrapper from a quoted identifier token.
std::string quoted_identifier_name(std::string_view text);

}  // namespace nl2kql::kql

#endif  // NL2KQL_LEXER_HPP_
