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
#ifndef NL2KQL_TOKEN_HPP_
#define NL2KQL_TOKEN_HPP_

#include <cstddef>
#include <string>

namespace nl2kql::kql {

// Byte offsets into the original source, [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Span&) const = default;
};

enum class TokenKind {
  Identifier,
  QuotedIdentifier,  // ['name with space'] or ["..."]
  StringLiteral,
  NumberLiteral,
  DateTimeLiteral,  // datetime(...) bodies and timespan forms like 0m, 7d, 100ms
  Operator,
  Punctuation,  // ( ) [ ] , ; | .
  Keyword,
  Comment,
  Whitespace,
};

struct Token {
  TokenKind kind = TokenKind::Identifier;
  // Exact source slice. Concatenating the text of all tokens reproduces the
  // input byte-for-byte.
  std::string text;
  Span span;

  bool is_trivia() const {
    return kind == TokenKind::Whitespace || kind == TokenKind::Comment;
  }
};

}  // namespace nl2kql::kql

#endif  // NL2KQL_TOKEN_HPP_
