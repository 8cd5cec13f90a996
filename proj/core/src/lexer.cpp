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
#include "nl2kql/lexer.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

namespace nl2kql::kql {

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

// Timespan suffixes recognized directly after a number, e.g. 0m, 7d, 100ms.
bool is_timespan_suffix(std::string_view s) {
  return s == "d" || s == "h" || s == "m" || s == "s" || s == "ms";
}

const std::unordered_set<std::string_view>& keyword_set() {
  static const std::unordered_set<std::string_view> kw = {
      "let",     "where", "project",  "extend", "summarize", "by",
      "order",   "sort",  "asc",      "desc",   "take",      "limit",
      "top",     "distinct", "join",  "kind",   "on",        "union",
      "range",   "from",  "to",       "step",   "serialize", "count",
      "render",  "and",   "or",       "in",     "contains",  "has",
      "has_any", "has_all", "matches", "regex", "between",   "typeof",
      "mv-expand", "mv-apply", "true", "false",
  };
  return kw;
}

}  // namespace

bool is_keyword(std::string_view word) {
  return keyword_set().count(word) > 0;
}

std::string decode_string_literal(std::string_view text) {
  if (text.size() < 2) return std::string(text);
  char quote = text.front();
  std::size_t end = text.size();
  if (text.back() == quote && text.size() >= 2) end = text.size() - 1;
  std::string out;
  out.reserve(end);
  for (std::size_t i = 1; i < end; ++i) {
    char c = text[i];
    if (c == '\\' && i + 1 < end) {
      char n = text[++i];
      switch (n) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '0': out.push_back('\0'); break;
        case '\\': out.push_back('\\'); break;
        case '\'': out.push_back('\''); break;
        case '"': out.push_back('"'); break;
        default:
          out.push_back('\\');
          out.push_back(n);
      }
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string quoted_identifier_name(std::string_view text) {
  // ['name'] or ["name"]
  if (text.size() >= 4 && text.front() == '[' && text.back() == ']') {
    std::string_view inner = text.substr(1, text.size() - 2);
    if (inner.size() >= 2 && (inner.front() == '\'' || inner.front() == '"') &&
        inner.back() == inner.front()) {
      return std::string(inner.substr(1, inner.size() - 2));
    }
  }
  return std::string(text);
}

std::vector<Token> tokenize(std::string_view text,
                            std::vector<Diagnostic>& diagnostics) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();

  auto push = [&](TokenKind kind, std::size_t start, std::size_t end) {
    tokens.push_back(
        Token{kind, std::string(text.substr(start, end - start)), {start, end}});
  };

  while (i < n) {
    const std::size_t start = i;
    const char c = text[i];

    if (std::isspace(static_cast<unsigned char>(c))) {
      while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      push(TokenKind::Whitespace, start, i);
      continue;
    }

    // Line comment.
    if (c == '/' && i + 1 < n && text[i + 1] == '/') {
      while (i < n && text[i] != '\n') ++i;
      push(TokenKind::Comment, start, i);
      continue;
    }

    if (c == '\'' || c == '"') {
      ++i;
      bool terminated = false;
      while (i < n && text[i] != '\n') {
        if (text[i] == '\\' && i + 1 < n) {
          i += 2;
          continue;
        }
        if (text[i] == c) {
          ++i;
          terminated = true;
          break;
        }
        ++i;
      }
      push(TokenKind::StringLiteral, start, i);
      if (!terminated) {
        diagnostics.push_back({Severity::Syntax, "unterminated-string",
                               "string literal is missing its closing quote",
                               {start, i},
                               ""});
      }
      continue;
    }

    // Quoted identifier: ['name'] / ["name"].
    if (c == '[' && i + 1 < n && (text[i + 1] == '\'' || text[i + 1] == '"')) {
      const char quote = text[i + 1];
      std::size_t j = i + 2;
      bool closed = false;
      while (j < n && text[j] != '\n') {
        if (text[j] == quote && j + 1 < n && text[j + 1] == ']') {
          j += 2;
          closed = true;
          break;
        }
        ++j;
      }
      if (closed) {
        i = j;
        push(TokenKind::QuotedIdentifier, start, i);
        continue;
      }
      // Fall through and treat '[' as punctuation.
    }

    if (is_digit(c)) {
      ++i;
      while (i < n && is_digit(text[i])) ++i;
      if (i < n && text[i] == '.' && i + 1 < n && is_digit(text[i + 1])) {
        ++i;
        while (i < n && is_digit(text[i])) ++i;
      }
      if (i < n && (text[i] == 'e' || text[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < n && (text[j] == '+' || text[j] == '-')) ++j;
        if (j < n && is_digit(text[j])) {
          i = j;
          while (i < n && is_digit(text[i])) ++i;
          push(TokenKind::NumberLiteral, start, i);
          continue;
        }
      }
      // Timespan literal when the number runs straight into a unit suffix.
      if (i < n && std::isalpha(static_cast<unsigned char>(text[i]))) {
        std::size_t j = i;
        while (j < n && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
        if (is_timespan_suffix(text.substr(i, j - i))) {
          i = j;
          push(TokenKind::DateTimeLiteral, start, i);
          continue;
        }
      }
      push(TokenKind::NumberLiteral, start, i);
      continue;
    }

    if (is_ident_start(c)) {
      ++i;
      while (i < n && is_ident_char(text[i])) ++i;
      std::string_view word = text.substr(start, i - start);

      // datetime(...) is lexed as one literal token.
      if (word == "datetime" && i < n && text[i] == '(') {
        std::size_t j = i + 1;
        while (j < n && text[j] != ')' && text[j] != '\n') ++j;
        if (j < n && text[j] == ')') {
          i = j + 1;
          push(TokenKind::DateTimeLiteral, start, i);
          continue;
        }
      }
      // mv-expand / mv-apply are single keywords despite the dash.
      if (word == "mv" && i + 1 < n && text[i] == '-') {
        std::size_t j = i + 1;
        while (j < n && is_ident_char(text[j])) ++j;
        std::string_view tail = text.substr(i + 1, j - i - 1);
        if (tail == "expand" || tail == "apply") {
          i = j;
          push(TokenKind::Keyword, start, i);
          continue;
        }
      }
      // in~ is one operator keyword.
      if (word == "in" && i < n && text[i] == '~') {
        ++i;
        push(TokenKind::Keyword, start, i);
        continue;
      }

      push(is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, start, i);
      continue;
    }

    // Multi-character operators first.
    auto two = (i + 1 < n) ? text.substr(i, 2) : std::string_view{};
    if (two == "==" || two == "!=" || two == "<=" || two == ">=" || two == "..") {
      i += 2;
      push(TokenKind::Operator, start, i);
      continue;
    }
    switch (c) {
      case '<': case '>': case '+': case '-': case '*': case '/': case '=':
        ++i;
        push(TokenKind::Operator, start, i);
        continue;
      case '(': case ')': case '[': case ']': case ',': case ';': case '|':
      case '.':
        ++i;
        push(TokenKind::Punctuation, start, i);
        continue;
      default:
        break;
    }

    // Unknown byte: keep it as punctuation so the stream stays lossless.
    ++i;
    push(TokenKind::Punctuation, start, i);
  }

  return tokens;
}

}  // namespace nl2kql::kql
