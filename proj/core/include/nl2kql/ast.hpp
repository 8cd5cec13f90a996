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
#ifndef NL2KQL_AST_HPP_
#define NL2KQL_AST_HPP_

#include <memory>
#include <string>
#include <vector>

#include "nl2kql/token.hpp"

namespace nl2kql::kql {

struct Query;

enum class ExprKind {
  ColumnRef,       // bare identifier; may also name a let-bound scalar
  Literal,
  FunctionCall,    // name(args...)
  Unary,           // op in {-}
  Binary,          // op from the scalar-operator set
  Between,         // args = {value, low, high}
  Case,            // case(cond, val, ..., default); args are the branches
  PropertyAccess,  // args[0].name, for parse_json results and $left/$right
  List,            // parenthesized value list, rhs of in / in~ / has_any / has_all
  Subquery,        // parenthesized tabular expression used as a scalar
};

enum class LiteralKind { String, Number, Bool, DateTime, Timespan };

struct Expr {
  ExprKind kind = ExprKind::ColumnRef;
  Span span;

  // ColumnRef / FunctionCall / PropertyAccess member / Unary / Binary: the
  // identifier, function name, property name, or operator spelling.
  std::string name;

  LiteralKind literal_kind = LiteralKind::String;
  std::string literal_text;   // exact source spelling
  std::string string_value;   // decoded content for string literals

  // Children. Layout depends on kind:
  //   Unary:          {operand}
  //   Binary:         {lhs, rhs}
  //   Between:        {value, low, high}
  //   FunctionCall:   arguments in order
  //   Case:           branches in order
  //   PropertyAccess: {base}
  //   List:           elements
  std::vector<std::unique_ptr<Expr>> args;

  std::unique_ptr<Query> subquery;  // Subquery only
};

enum class TableExprKind { Table, Union, Subquery, Range };

struct TableExpression {
  TableExprKind kind = TableExprKind::Table;
  Span span;
  std::string table;                        // Table
  std::vector<std::string> union_tables;    // Union
  std::unique_ptr<Query> subquery;          // Subquery
  std::string range_var;                    // Range
  std::unique_ptr<Expr> range_from, range_to, range_step;
};

enum class StageKind {
  Where,
  Project,
  Extend,
  Summarize,
  OrderBy,     // order by / sort by
  Take,        // take / limit
  Top,
  Distinct,
  Join,
  MvExpand,
  MvApply,
  Serialize,
  Count,
  Render,
  BareAssign,  // recovery for `| Name = expr`; always carries a syntax diagnostic
};

// `Name = expr` or a bare expression (name empty).
struct NamedExpr {
  std::string name;
  std::unique_ptr<Expr> expr;
};

enum class SortDirection { Default, Asc, Desc };

struct OrderItem {
  std::unique_ptr<Expr> expr;
  SortDirection direction = SortDirection::Default;
};

struct PipeStage {
  StageKind kind = StageKind::Where;
  Span span;
  std::string keyword;  // source spelling: order vs sort, take vs limit

  std::unique_ptr<Expr> expr;          // where predicate, take/top row count
  std::vector<NamedExpr> items;        // project/extend/summarize/serialize/distinct/bare-assign
  std::vector<NamedExpr> by_keys;      // summarize by
  std::vector<OrderItem> order_items;  // order by, top's by clause
  bool distinct_star = false;

  std::string join_kind;  // empty when not spelled out
  std::unique_ptr<TableExpression> join_right;
  std::vector<std::unique_ptr<Expr>> join_conditions;

  std::string mv_name;    // mv-expand Name=
  std::string mv_typeof;  // to typeof(<type>)
  std::unique_ptr<Query> mv_subquery;  // mv-apply on ( ... )

  std::string render_kind;
};

struct LetBinding {
  std::string name;
  Span span;
  std::unique_ptr<Expr> value;     // scalar binding
  std::unique_ptr<Query> subquery; // tabular binding
};

struct Query {
  std::vector<LetBinding> lets;
  std::unique_ptr<TableExpression> source;
  std::vector<PipeStage> stages;
};

}  // namespace nl2kql::kql

#endif  // NL2KQL_AST_HPP_
