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
#include "nl2kql/parser.hpp"

#include <unordered_set>
#include <utility>

namespace nl2kql::kql {

namespace {

const std::unordered_set<std::string_view> kJoinKinds = {
    "inner",    "innerunique", "leftouter",    "rightouter",    "fullouter",
    "leftsemi", "rightsemi",   "leftanti",     "rightanti",     "leftantisemi",
    "rightantisemi"};

// Recursive-descent parser over the significant (non-trivia) token stream.
// Never throws: errors become diagnostics and the parser re-synchronizes at
// the next stage boundary, leaving a best-effort AST behind.
class Parser {
 public:
  Parser(std::vector<Token> significant, std::vector<Diagnostic>& diags)
      : toks_(std::move(significant)), diags_(diags) {}

  Query parse_top_level() {
    Query q = parse_query(/*nested=*/false);
    if (at(TokenKind::Punctuation, ";")) advance();
    if (!at_end() && !panic_) {
      error("unexpected-token", "unexpected input after the query");
    }
    return q;
  }

 private:
  // ---- token cursor -------------------------------------------------------

  bool at_end() const { return pos_ >= toks_.size(); }

  const Token& cur() const {
    static const Token eof{TokenKind::Punctuation, "", {0, 0}};
    return at_end() ? eof : toks_[pos_];
  }

  const Token& peek(std::size_t k = 1) const {
    static const Token eof{TokenKind::Punctuation, "", {0, 0}};
    return pos_ + k >= toks_.size() ? eof : toks_[pos_ + k];
  }

  bool at(TokenKind kind) const { return !at_end() && cur().kind == kind; }

  bool at(TokenKind kind, std::string_view text) const {
    return !at_end() && cur().kind == kind && cur().text == text;
  }

  bool at_keyword(std::string_view kw) const {
    return at(TokenKind::Keyword, kw);
  }

  void advance() {
    if (!at_end()) ++pos_;
  }

  bool accept(TokenKind kind, std::string_view text) {
    if (at(kind, text)) {
      advance();
      return true;
    }
    return false;
  }

  bool expect(TokenKind kind, std::string_view text, std::string_view what) {
    if (accept(kind, text)) return true;
    error("unexpected-token",
          std::string("expected ") + std::string(what) + ", found '" +
              (at_end() ? std::string("<end>") : cur().text) + "'");
    return false;
  }

  Span here() const {
    if (at_end()) {
      std::size_t e = toks_.empty() ? 0 : toks_.back().span.end;
      return {e, e};
    }
    return cur().span;
  }

  void error(std::string code, std::string message) {
    if (panic_) return;  // one diagnostic per re-sync region
    diags_.push_back({Severity::Syntax, std::move(code), std::move(message),
                      here(), ""});
    panic_ = true;
  }

  // Skips ahead to the next stage boundary after an error. Parens are
  // balanced so a '|' inside a subquery does not end the skip early.
  void resynchronize() {
    int depth = 0;
    while (!at_end()) {
      const Token& t = cur();
      if (t.kind == TokenKind::Punctuation) {
        if (t.text == "(") ++depth;
        if (t.text == ")") {
          if (depth == 0) break;
          --depth;
        }
        if (depth == 0 && (t.text == "|" || t.text == ";")) break;
      }
      advance();
    }
    panic_ = false;
  }

  // ---- helpers ------------------------------------------------------------

  static std::unique_ptr<Expr> make_expr(ExprKind kind, Span span) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->span = span;
    return e;
  }

  bool at_name() const {
    return at(TokenKind::Identifier) || at(TokenKind::QuotedIdentifier);
  }

  // Consumes an identifier or quoted identifier and returns its bare name.
  std::string take_name(std::string_view what) {
    if (at(TokenKind::Identifier)) {
      std::string n = cur().text;
      advance();
      return n;
    }
    if (at(TokenKind::QuotedIdentifier)) {
      std::string n = quoted_identifier_name(cur().text);
      advance();
      return n;
    }
    error("unexpected-token", std::string("expected ") + std::string(what));
    return "";
  }

  // ---- query --------------------------------------------------------------

  Query parse_query(bool nested) {
    Query q;
    while (at_keyword("let") && !panic_) {
      parse_let(q);
      if (panic_) resynchronize();
      if (at(TokenKind::Punctuation, ";")) advance();
    }
    q.source = parse_table_expression();
    if (panic_) resynchronize();
    while (at(TokenKind::Punctuation, "|")) {
      advance();
      if (at_end() || (nested && at(TokenKind::Punctuation, ")"))) {
        error("dangling-pipe", "pipe with no stage after it");
        panic_ = false;
        break;
      }
      q.stages.push_back(parse_stage());
      if (panic_) resynchronize();
    }
    return q;
  }

  void parse_let(Query& q) {
    LetBinding let;
    Span start = here();
    advance();  // let
    let.name = take_name("a name after 'let'");
    if (panic_) return;
    if (!expect(TokenKind::Operator, "=", "'=' in let statement")) return;

    if (at_keyword("union") || at_keyword("range")) {
      let.subquery = std::make_unique<Query>(parse_query(/*nested=*/false));
    } else {
      auto value = parse_expression();
      if (!panic_ && at(TokenKind::Punctuation, "|")) {
        // Tabular binding: `let X = T | ...;`
        if (value->kind == ExprKind::ColumnRef) {
          auto sub = std::make_unique<Query>();
          sub->source = std::make_unique<TableExpression>();
          sub->source->kind = TableExprKind::Table;
          sub->source->table = value->name;
          sub->source->span = value->span;
          while (at(TokenKind::Punctuation, "|")) {
            advance();
            sub->stages.push_back(parse_stage());
            if (panic_) return;
          }
          let.subquery = std::move(sub);
        } else {
          error("bad-let", "let binding mixes a scalar expression with a pipe");
          return;
        }
      } else if (value->kind == ExprKind::Subquery) {
        let.subquery = std::move(value->subquery);
      } else {
        let.value = std::move(value);
      }
    }
    if (panic_) return;
    let.span = {start.start, here().start};
    if (!at(TokenKind::Punctuation, ";")) {
      error("bad-let", "expected ';' after let statement");
      return;
    }
    advance();
    q.lets.push_back(std::move(let));
  }

  std::unique_ptr<TableExpression> parse_table_expression() {
    auto te = std::make_unique<TableExpression>();
    te->span = here();
    if (at_keyword("union")) {
      advance();
      te->kind = TableExprKind::Union;
      te->union_tables.push_back(take_name("a table name after 'union'"));
      while (!panic_ && accept(TokenKind::Punctuation, ",")) {
        te->union_tables.push_back(take_name("a table name"));
      }
      return te;
    }
    if (at_keyword("range")) {
      advance();
      te->kind = TableExprKind::Range;
      te->range_var = take_name("a variable name after 'range'");
      if (panic_) return te;
      expect(TokenKind::Keyword, "from", "'from'");
      te->range_from = parse_expression();
      expect(TokenKind::Keyword, "to", "'to'");
      te->range_to = parse_expression();
      expect(TokenKind::Keyword, "step", "'step'");
      te->range_step = parse_expression();
      return te;
    }
    if (at(TokenKind::Punctuation, "(")) {
      advance();
      te->kind = TableExprKind::Subquery;
      te->subquery = std::make_unique<Query>(parse_query(/*nested=*/true));
      expect(TokenKind::Punctuation, ")", "')' closing the subquery");
      return te;
    }
    if (at_name()) {
      te->kind = TableExprKind::Table;
      te->table = take_name("a table name");
      return te;
    }
    error("empty-query", "expected a table expression");
    return te;
  }

  // ---- stages -------------------------------------------------------------

  PipeStage parse_stage() {
    PipeStage s;
    s.span = here();
    const Token& t = cur();

    if (t.kind == TokenKind::Keyword) {
      const std::string& kw = t.text;
      if (kw == "where") return parse_where();
      if (kw == "project") return parse_projection(StageKind::Project);
      if (kw == "extend") return parse_projection(StageKind::Extend);
      if (kw == "summarize") return parse_summarize();
      if (kw == "order" || kw == "sort") return parse_order();
      if (kw == "take" || kw == "limit") return parse_take();
      if (kw == "top") return parse_top();
      if (kw == "distinct") return parse_distinct();
      if (kw == "join") return parse_join();
      if (kw == "mv-expand") return parse_mv_expand(/*apply=*/false);
      if (kw == "mv-apply") return parse_mv_expand(/*apply=*/true);
      if (kw == "serialize") return parse_serialize();
      if (kw == "count") {
        s.kind = StageKind::Count;
        s.keyword = "count";
        advance();
        return s;
      }
      if (kw == "render") {
        s.kind = StageKind::Render;
        s.keyword = "render";
        advance();
        s.render_kind = take_name("a visualization name after 'render'");
        return s;
      }
    }

    // `| Name = expr` is not a stage; keep it so repair can wrap it in an
    // extend, and flag it.
    if (at_name() && peek().kind == TokenKind::Operator && peek().text == "=") {
      s.kind = StageKind::BareAssign;
      NamedExpr item;
      item.name = take_name("a name");
      advance();  // '='
      item.expr = parse_expression();
      s.items.push_back(std::move(item));
      diags_.push_back({Severity::Syntax, "bare-assignment-stage",
                        "assignment used as a pipeline stage", s.span, ""});
      return s;
    }

    error("unknown-operator",
          "unknown operator '" + (at_end() ? std::string("<end>") : t.text) + "'");
    return s;
  }

  PipeStage parse_where() {
    PipeStage s;
    s.kind = StageKind::Where;
    s.keyword = "where";
    s.span = here();
    advance();
    s.expr = parse_expression();
    return s;
  }

  PipeStage parse_projection(StageKind kind) {
    PipeStage s;
    s.kind = kind;
    s.keyword = kind == StageKind::Project ? "project" : "extend";
    s.span = here();
    advance();
    parse_named_expr_list(s.items, /*stop_at_by=*/false);
    return s;
  }

  PipeStage parse_summarize() {
    PipeStage s;
    s.kind = StageKind::Summarize;
    s.keyword = "summarize";
    s.span = here();
    advance();
    if (!at_keyword("by")) {
      parse_named_expr_list(s.items, /*stop_at_by=*/true);
    }
    if (at_keyword("by")) {
      advance();
      parse_named_expr_list(s.by_keys, /*stop_at_by=*/false);
    }
    return s;
  }

  PipeStage parse_order() {
    PipeStage s;
    s.kind = StageKind::OrderBy;
    s.keyword = cur().text;
    s.span = here();
    advance();
    expect(TokenKind::Keyword, "by", "'by'");
    do {
      s.order_items.push_back(parse_order_item());
    } while (!panic_ && accept(TokenKind::Punctuation, ","));
    return s;
  }

  OrderItem parse_order_item() {
    OrderItem item;
    item.expr = parse_expression();
    if (at_keyword("asc")) {
      item.direction = SortDirection::Asc;
      advance();
    } else if (at_keyword("desc")) {
      item.direction = SortDirection::Desc;
      advance();
    }
    return item;
  }

  PipeStage parse_take() {
    PipeStage s;
    s.kind = StageKind::Take;
    s.keyword = cur().text;
    s.span = here();
    advance();
    s.expr = parse_expression();
    return s;
  }

  PipeStage parse_top() {
    PipeStage s;
    s.kind = StageKind::Top;
    s.keyword = "top";
    s.span = here();
    advance();
    s.expr = parse_expression();
    expect(TokenKind::Keyword, "by", "'by' in top");
    s.order_items.push_back(parse_order_item());
    return s;
  }

  PipeStage parse_distinct() {
    PipeStage s;
    s.kind = StageKind::Distinct;
    s.keyword = "distinct";
    s.span = here();
    advance();
    if (at(TokenKind::Operator, "*")) {
      s.distinct_star = true;
      advance();
      return s;
    }
    parse_named_expr_list(s.items, /*stop_at_by=*/false);
    return s;
  }

  PipeStage parse_join() {
    PipeStage s;
    s.kind = StageKind::Join;
    s.keyword = "join";
    s.span = here();
    advance();
    if (at_keyword("kind")) {
      advance();
      expect(TokenKind::Operator, "=", "'=' after 'kind'");
      if (at(TokenKind::Identifier)) {
        s.join_kind = cur().text;
        if (!kJoinKinds.count(s.join_kind)) {
          diags_.push_back({Severity::Syntax, "unknown-join-kind",
                            "unknown join kind '" + s.join_kind + "'", here(),
                            ""});
        }
        advance();
      } else {
        error("unexpected-token", "expected a join kind");
      }
    }
    if (panic_) return s;

    s.join_right = std::make_unique<TableExpression>();
    s.join_right->span = here();
    if (at(TokenKind::Punctuation, "(")) {
      advance();
      s.join_right->kind = TableExprKind::Subquery;
      s.join_right->subquery =
          std::make_unique<Query>(parse_query(/*nested=*/true));
      expect(TokenKind::Punctuation, ")", "')' closing the join side");
    } else if (at_name()) {
      s.join_right->kind = TableExprKind::Table;
      s.join_right->table = take_name("a table name");
    } else {
      error("unexpected-token", "expected a table or subquery after 'join'");
    }
    if (panic_) return s;

    expect(TokenKind::Keyword, "on", "'on' in join");
    do {
      s.join_conditions.push_back(parse_expression());
    } while (!panic_ && accept(TokenKind::Punctuation, ","));
    return s;
  }

  PipeStage parse_mv_expand(bool apply) {
    PipeStage s;
    s.kind = apply ? StageKind::MvApply : StageKind::MvExpand;
    s.keyword = apply ? "mv-apply" : "mv-expand";
    s.span = here();
    advance();
    if (at_name() && peek().kind == TokenKind::Operator && peek().text == "=") {
      s.mv_name = take_name("a name");
      advance();  // '='
    }
    s.expr = parse_expression();
    if (at_keyword("to")) {
      advance();
      expect(TokenKind::Keyword, "typeof", "'typeof'");
      expect(TokenKind::Punctuation, "(", "'('");
      s.mv_typeof = take_name("a type name");
      expect(TokenKind::Punctuation, ")", "')'");
    }
    if (apply) {
      expect(TokenKind::Keyword, "on", "'on' in mv-apply");
      expect(TokenKind::Punctuation, "(", "'(' opening the mv-apply body");
      // The body usually has no source; it starts at a stage and operates on
      // the expanded rows.
      if (at_stage_keyword()) {
        s.mv_subquery = std::make_unique<Query>(parse_headless_query());
      } else {
        s.mv_subquery = std::make_unique<Query>(parse_query(/*nested=*/true));
      }
      expect(TokenKind::Punctuation, ")", "')' closing the mv-apply body");
    }
    return s;
  }

  bool at_stage_keyword() const {
    if (!at(TokenKind::Keyword)) return false;
    static const std::unordered_set<std::string_view> kStageKeywords = {
        "where",    "project", "extend", "summarize", "order",
        "sort",     "take",    "limit",  "top",       "distinct",
        "join",     "mv-expand", "mv-apply", "serialize", "count",
        "render"};
    return kStageKeywords.count(cur().text) > 0;
  }

  Query parse_headless_query() {
    Query q;
    q.stages.push_back(parse_stage());
    while (!panic_ && at(TokenKind::Punctuation, "|")) {
      advance();
      q.stages.push_back(parse_stage());
    }
    return q;
  }

  PipeStage parse_serialize() {
    PipeStage s;
    s.kind = StageKind::Serialize;
    s.keyword = "serialize";
    s.span = here();
    advance();
    if (at_name() && peek().kind == TokenKind::Operator && peek().text == "=") {
      parse_named_expr_list(s.items, /*stop_at_by=*/false);
    }
    return s;
  }

  void parse_named_expr_list(std::vector<NamedExpr>& out, bool stop_at_by) {
    do {
      if (stop_at_by && at_keyword("by")) break;
      NamedExpr item;
      if (at_name() && peek().kind == TokenKind::Operator &&
          peek().text == "=") {
        item.name = take_name("a name");
        advance();  // '='
      }
      item.expr = parse_expression();
      out.push_back(std::move(item));
      if (panic_) break;
    } while (accept(TokenKind::Punctuation, ","));
  }

  // ---- expressions --------------------------------------------------------

  std::unique_ptr<Expr> parse_expression() { return parse_or(); }

  std::unique_ptr<Expr> make_binary(std::string op, std::unique_ptr<Expr> lhs,
                                    std::unique_ptr<Expr> rhs) {
    Span span{lhs->span.start, rhs ? rhs->span.end : lhs->span.end};
    auto e = make_expr(ExprKind::Binary, span);
    e->name = std::move(op);
    e->args.push_back(std::move(lhs));
    e->args.push_back(std::move(rhs));
    return e;
  }

  std::unique_ptr<Expr> parse_or() {
    auto lhs = parse_and();
    while (!panic_ && at_keyword("or")) {
      advance();
      lhs = make_binary("or", std::move(lhs), parse_and());
    }
    return lhs;
  }

  std::unique_ptr<Expr> parse_and() {
    auto lhs = parse_comparison();
    while (!panic_ && at_keyword("and")) {
      advance();
      lhs = make_binary("and", std::move(lhs), parse_comparison());
    }
    return lhs;
  }

  std::unique_ptr<Expr> parse_comparison() {
    auto lhs = parse_additive();
    if (panic_) return lhs;

    if (at(TokenKind::Operator)) {
      const std::string& op = cur().text;
      if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" ||
          op == ">=") {
        advance();
        return make_binary(op, std::move(lhs), parse_additive());
      }
    }
    if (at_keyword("contains") || at_keyword("has")) {
      std::string op = cur().text;
      advance();
      return make_binary(std::move(op), std::move(lhs), parse_additive());
    }
    if (at_keyword("has_any") || at_keyword("has_all") || at_keyword("in") ||
        at_keyword("in~")) {
      std::string op = cur().text;
      advance();
      return make_binary(std::move(op), std::move(lhs), parse_value_list());
    }
    if (at_keyword("matches")) {
      advance();
      expect(TokenKind::Keyword, "regex", "'regex' after 'matches'");
      return make_binary("matches regex", std::move(lhs), parse_additive());
    }
    if (at_keyword("between")) {
      advance();
      return parse_between_tail(std::move(lhs));
    }
    return lhs;
  }

  std::unique_ptr<Expr> parse_value_list() {
    Span start = here();
    auto list = make_expr(ExprKind::List, start);
    if (!expect(TokenKind::Punctuation, "(", "'(' opening a value list")) {
      return list;
    }
    if (!at(TokenKind::Punctuation, ")")) {
      do {
        list->args.push_back(parse_expression());
        if (panic_) return list;
      } while (accept(TokenKind::Punctuation, ","));
    }
    expect(TokenKind::Punctuation, ")", "')' closing the value list");
    list->span.end = toks_[pos_ ? pos_ - 1 : 0].span.end;
    return list;
  }

  // `value between (low .. high)`. The unparenthesized spelling is accepted
  // so repair can fix it, but it is flagged as a syntax error.
  std::unique_ptr<Expr> parse_between_tail(std::unique_ptr<Expr> value) {
    Span start = value->span;
    auto between = make_expr(ExprKind::Between, start);
    bool parens = accept(TokenKind::Punctuation, "(");
    auto low = parse_additive();
    if (panic_) {
      between->args.push_back(std::move(value));
      return between;
    }
    expect(TokenKind::Operator, "..", "'..' in between range");
    auto high = parse_additive();
    if (parens) {
      expect(TokenKind::Punctuation, ")", "')' closing the between range");
    } else {
      diags_.push_back({Severity::Syntax, "between-missing-parens",
                        "between range must be parenthesized",
                        {start.start, high ? high->span.end : start.end},
                        ""});
    }
    between->span = {start.start, here().start};
    between->args.push_back(std::move(value));
    between->args.push_back(std::move(low));
    between->args.push_back(std::move(high));
    return between;
  }

  std::unique_ptr<Expr> parse_additive() {
    auto lhs = parse_multiplicative();
    while (!panic_ && at(TokenKind::Operator) &&
           (cur().text == "+" || cur().text == "-")) {
      std::string op = cur().text;
      advance();
      lhs = make_binary(std::move(op), std::move(lhs), parse_multiplicative());
    }
    return lhs;
  }

  std::unique_ptr<Expr> parse_multiplicative() {
    auto lhs = parse_unary();
    while (!panic_ && at(TokenKind::Operator) &&
           (cur().text == "*" || cur().text == "/")) {
      std::string op = cur().text;
      advance();
      lhs = make_binary(std::move(op), std::move(lhs), parse_unary());
    }
    return lhs;
  }

  std::unique_ptr<Expr> parse_unary() {
    if (at(TokenKind::Operator, "-")) {
      Span span = here();
      advance();
      auto e = make_expr(ExprKind::Unary, span);
      e->name = "-";
      e->args.push_back(parse_unary());
      e->span.end = e->args[0]->span.end;
      return e;
    }
    return parse_postfix();
  }

  std::unique_ptr<Expr> parse_postfix() {
    auto e = parse_primary();
    while (!panic_ && at(TokenKind::Punctuation, ".")) {
      advance();
      auto access = make_expr(ExprKind::PropertyAccess, e->span);
      access->name = take_name("a property name");
      access->args.push_back(std::move(e));
      access->span.end = here().start;
      e = std::move(access);
    }
    return e;
  }

  std::unique_ptr<Expr> parse_primary() {
    Span span = here();

    if (at(TokenKind::StringLiteral)) {
      auto e = make_expr(ExprKind::Literal, span);
      e->literal_kind = LiteralKind::String;
      e->literal_text = cur().text;
      e->string_value = decode_string_literal(cur().text);
      advance();
      return e;
    }
    if (at(TokenKind::NumberLiteral)) {
      auto e = make_expr(ExprKind::Literal, span);
      e->literal_kind = LiteralKind::Number;
      e->literal_text = cur().text;
      advance();
      return e;
    }
    if (at(TokenKind::DateTimeLiteral)) {
      auto e = make_expr(ExprKind::Literal, span);
      e->literal_kind = cur().text.rfind("datetime(", 0) == 0
                            ? LiteralKind::DateTime
                            : LiteralKind::Timespan;
      e->literal_text = cur().text;
      advance();
      return e;
    }
    if (at_keyword("true") || at_keyword("false")) {
      auto e = make_expr(ExprKind::Literal, span);
      e->literal_kind = LiteralKind::Bool;
      e->literal_text = cur().text;
      advance();
      return e;
    }

    // count() and range(...) are functions spelled with keyword tokens.
    if ((at_keyword("count") || at_keyword("range")) &&
        peek().kind == TokenKind::Punctuation && peek().text == "(") {
      std::string name = cur().text;
      advance();
      return parse_call_tail(std::move(name), span);
    }

    if (at_name()) {
      std::string name = take_name("an identifier");
      if (at(TokenKind::Punctuation, "(")) {
        return parse_call_tail(std::move(name), span);
      }
      auto e = make_expr(ExprKind::ColumnRef, {span.start, here().start});
      e->name = std::move(name);
      e->span = span;
      return e;
    }

    if (at(TokenKind::Punctuation, "(")) {
      advance();
      // A parenthesized tabular expression is a subquery usable as a scalar.
      if (at_keyword("union") || at_keyword("range") || at_keyword("let")) {
        auto e = make_expr(ExprKind::Subquery, span);
        e->subquery = std::make_unique<Query>(parse_query(/*nested=*/true));
        expect(TokenKind::Punctuation, ")", "')' closing the subquery");
        e->span.end = here().start;
        return e;
      }
      auto inner = parse_expression();
      if (!panic_ && at(TokenKind::Punctuation, "|")) {
        if (inner->kind != ExprKind::ColumnRef) {
          error("unexpected-token", "'|' after a non-tabular expression");
          return inner;
        }
        auto sub = std::make_unique<Query>();
        sub->source = std::make_unique<TableExpression>();
        sub->source->kind = TableExprKind::Table;
        sub->source->table = inner->name;
        sub->source->span = inner->span;
        while (at(TokenKind::Punctuation, "|")) {
          advance();
          sub->stages.push_back(parse_stage());
          if (panic_) break;
        }
        auto e = make_expr(ExprKind::Subquery, span);
        e->subquery = std::move(sub);
        expect(TokenKind::Punctuation, ")", "')' closing the subquery");
        e->span.end = here().start;
        return e;
      }
      expect(TokenKind::Punctuation, ")", "')'");
      return inner;
    }

    error("unexpected-token",
          "expected an expression, found '" +
              (at_end() ? std::string("<end>") : cur().text) + "'");
    return make_expr(ExprKind::Literal, span);
  }

  std::unique_ptr<Expr> parse_call_tail(std::string name, Span span) {
    advance();  // '('
    auto call = make_expr(name == "case" ? ExprKind::Case : ExprKind::FunctionCall,
                          span);
    call->name = std::move(name);
    if (!at(TokenKind::Punctuation, ")")) {
      do {
        call->args.push_back(parse_expression());
        if (panic_) return call;
      } while (accept(TokenKind::Punctuation, ","));
    }
    if (!expect(TokenKind::Punctuation, ")", "')' closing the argument list")) {
      diags_.back().code = "unbalanced-paren";
    }
    call->span.end = here().start;
    return call;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic>& diags_;
  bool panic_ = false;
};

}  // namespace

ParseResult parse(std::string_view text) {
  ParseResult result;
  result.tokens = tokenize(text, result.diagnostics);

  std::vector<Token> significant;
  significant.reserve(result.tokens.size());
  for (const auto& t : result.tokens) {
    if (!t.is_trivia()) significant.push_back(t);
  }
  if (significant.empty()) {
    result.diagnostics.push_back(
        {Severity::Syntax, "empty-query", "query has no content", {0, 0}, ""});
    return result;
  }

  Parser parser(std::move(significant), result.diagnostics);
  result.query = parser.parse_top_level();
  return result;
}

}  // namespace nl2kql::kql
