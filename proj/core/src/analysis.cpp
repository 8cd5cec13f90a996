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
#include "nl2kql/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <unordered_set>

namespace nl2kql {

const ColumnDef* TableDef::find_column(std::string_view column_name) const {
  for (const auto& col : columns) {
    if (col.name == column_name) return &col;
  }
  return nullptr;
}

const TableDef* Schema::find_table(std::string_view table_name) const {
  for (const auto& table : tables) {
    if (table.name == table_name) return &table;
  }
  return nullptr;
}

}  // namespace nl2kql

namespace nl2kql::kql {

namespace {

// Visits every query reachable from `q`: let bodies, subquery sources, join
// right sides, mv-apply bodies, and subqueries nested in any expression.
void for_each_query(const Query& q, const std::function<void(const Query&)>& fn);

void for_each_expr_query(const Expr* e,
                         const std::function<void(const Query&)>& fn) {
  if (e == nullptr) return;
  if (e->kind == ExprKind::Subquery) {
    if (e->subquery) for_each_query(*e->subquery, fn);
    return;
  }
  for (const auto& arg : e->args) for_each_expr_query(arg.get(), fn);
}

void for_each_named(const std::vector<NamedExpr>& items,
                    const std::function<void(const Query&)>& fn) {
  for (const auto& item : items) for_each_expr_query(item.expr.get(), fn);
}

void for_each_query(const Query& q,
                    const std::function<void(const Query&)>& fn) {
  fn(q);
  for (const auto& let : q.lets) {
    if (let.subquery) for_each_query(*let.subquery, fn);
    if (let.value) for_each_expr_query(let.value.get(), fn);
  }
  if (q.source) {
    if (q.source->subquery) for_each_query(*q.source->subquery, fn);
    for_each_expr_query(q.source->range_from.get(), fn);
    for_each_expr_query(q.source->range_to.get(), fn);
    for_each_expr_query(q.source->range_step.get(), fn);
  }
  for (const auto& s : q.stages) {
    for_each_expr_query(s.expr.get(), fn);
    for_each_named(s.items, fn);
    for_each_named(s.by_keys, fn);
    for (const auto& item : s.order_items) {
      for_each_expr_query(item.expr.get(), fn);
    }
    if (s.join_right && s.join_right->subquery) {
      for_each_query(*s.join_right->subquery, fn);
    }
    for (const auto& cond : s.join_conditions) {
      for_each_expr_query(cond.get(), fn);
    }
    if (s.mv_subquery) for_each_query(*s.mv_subquery, fn);
  }
}

// Table collection tracks let names lexically so `let X = T | ...; X | take 5`
// reports T but not X.
void collect_tables(const Query& q, std::set<std::string> lets,
                    std::set<std::string>& out);

void collect_expr_tables(const Expr* e, const std::set<std::string>& lets,
                         std::set<std::string>& out) {
  if (e == nullptr) return;
  if (e->kind == ExprKind::Subquery) {
    if (e->subquery) collect_tables(*e->subquery, lets, out);
    return;
  }
  for (const auto& arg : e->args) collect_expr_tables(arg.get(), lets, out);
}

void collect_source_tables(const TableExpression* te,
                           const std::set<std::string>& lets,
                           std::set<std::string>& out) {
  if (te == nullptr) return;
  switch (te->kind) {
    case TableExprKind::Table:
      if (!te->table.empty() && !lets.count(te->table)) out.insert(te->table);
      return;
    case TableExprKind::Union:
      for (const auto& name : te->union_tables) {
        if (!lets.count(name)) out.insert(name);
      }
      return;
    case TableExprKind::Range:
      collect_expr_tables(te->range_from.get(), lets, out);
      collect_expr_tables(te->range_to.get(), lets, out);
      collect_expr_tables(te->range_step.get(), lets, out);
      return;
    case TableExprKind::Subquery:
      if (te->subquery) collect_tables(*te->subquery, lets, out);
      return;
  }
}

void collect_tables(const Query& q, std::set<std::string> lets,
                    std::set<std::string>& out) {
  for (const auto& let : q.lets) {
    if (let.subquery) collect_tables(*let.subquery, lets, out);
    if (let.value) collect_expr_tables(let.value.get(), lets, out);
    lets.insert(let.name);
  }
  collect_source_tables(q.source.get(), lets, out);
  for (const auto& s : q.stages) {
    collect_expr_tables(s.expr.get(), lets, out);
    for (const auto& item : s.items) {
      collect_expr_tables(item.expr.get(), lets, out);
    }
    for (const auto& key : s.by_keys) {
      collect_expr_tables(key.expr.get(), lets, out);
    }
    for (const auto& item : s.order_items) {
      collect_expr_tables(item.expr.get(), lets, out);
    }
    collect_source_tables(s.join_right.get(), lets, out);
    for (const auto& cond : s.join_conditions) {
      collect_expr_tables(cond.get(), lets, out);
    }
    if (s.mv_subquery) collect_tables(*s.mv_subquery, lets, out);
  }
}

// Column references in a filter expression. Subqueries are skipped here; the
// query walk visits their own where stages separately.
void collect_filter_columns(const Expr* e, std::set<std::string>& out) {
  if (e == nullptr) return;
  switch (e->kind) {
    case ExprKind::ColumnRef:
      if (e->name != "$left" && e->name != "$right" && !e->name.empty()) {
        out.insert(e->name);
      }
      return;
    case ExprKind::PropertyAccess: {
      const Expr* root = e;
      const Expr* above_root = nullptr;
      while (root->kind == ExprKind::PropertyAccess && !root->args.empty() &&
             root->args[0]) {
        above_root = root;
        root = root->args[0].get();
      }
      if (root->kind == ExprKind::ColumnRef) {
        if (root->name == "$left" || root->name == "$right") {
          if (above_root) out.insert(above_root->name);
        } else if (!root->name.empty()) {
          out.insert(root->name);
        }
        return;
      }
      collect_filter_columns(root, out);
      return;
    }
    case ExprKind::Literal:
    case ExprKind::Subquery:
      return;
    default:
      for (const auto& arg : e->args) collect_filter_columns(arg.get(), out);
      return;
  }
}

std::string canonical_literal(const Expr& lit) {
  switch (lit.literal_kind) {
    case LiteralKind::String:
      return lit.string_value;
    case LiteralKind::Number:
      return canonical_number_text(lit.literal_text);
    case LiteralKind::Bool:
      return lit.literal_text == "true" ? "true" : "false";
    case LiteralKind::DateTime:
    case LiteralKind::Timespan:
      return lit.literal_text;
  }
  return lit.literal_text;
}

void collect_filter_literals(const Expr* e, std::set<std::string>& out) {
  if (e == nullptr) return;
  switch (e->kind) {
    case ExprKind::Literal:
      out.insert(canonical_literal(*e));
      return;
    case ExprKind::Unary:
      if (e->name == "-" && e->args.size() == 1 && e->args[0] &&
          e->args[0]->kind == ExprKind::Literal &&
          e->args[0]->literal_kind == LiteralKind::Number) {
        out.insert("-" + canonical_literal(*e->args[0]));
        return;
      }
      break;
    case ExprKind::Subquery:
      return;
    default:
      break;
  }
  for (const auto& arg : e->args) collect_filter_literals(arg.get(), out);
}

}  // namespace

std::string canonical_number_text(std::string_view text) {
  std::string s(text);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s.find('e') != std::string::npos) {
    double value = std::strtod(s.c_str(), nullptr);
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec == std::errc()) return std::string(buf, end);
    return s;
  }
  while (s.size() > 1 && s[0] == '0' && s[1] != '.') s.erase(0, 1);
  if (s.find('.') != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  if (s.empty()) s = "0";
  return s;
}

bool is_aggregate_function(std::string_view name) {
  static const std::unordered_set<std::string_view> kAggregates = {
      "count",    "countif", "dcount",    "dcountif", "sum",      "sumif",
      "avg",      "avgif",   "min",       "minif",    "max",      "maxif",
      "make_list", "make_set", "make_bag", "arg_max",  "arg_min",
      "percentile", "stdev",  "variance", "take_any", "any"};
  return kAggregates.count(name) > 0;
}

std::string aggregate_auto_name(const Expr& call) {
  std::string name = call.name + "_";
  if (!call.args.empty() && call.args[0] &&
      call.args[0]->kind == ExprKind::ColumnRef) {
    name += call.args[0]->name;
  }
  return name;
}

std::string projected_auto_name(const Expr& expr, std::size_t index) {
  if (expr.kind == ExprKind::ColumnRef) return expr.name;
  if (expr.kind == ExprKind::PropertyAccess) return expr.name;
  if (expr.kind == ExprKind::FunctionCall) {
    if (is_aggregate_function(expr.name)) return aggregate_auto_name(expr);
    // bin(Timestamp, 1d) keeps the column's name, matching engine behavior.
    if (!expr.args.empty() && expr.args[0] &&
        expr.args[0]->kind == ExprKind::ColumnRef) {
      return expr.args[0]->name;
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "Column%zu", index + 1);
  return buf;
}

JoinColumnMerge merge_join_columns(const std::vector<std::string>& left,
                                   const std::vector<std::string>& right) {
  JoinColumnMerge out;
  out.merged = left;
  std::set<std::string> used(left.begin(), left.end());
  out.right_names.reserve(right.size());
  for (const auto& name : right) {
    std::string candidate = name;
    for (int i = 1; used.count(candidate); ++i) {
      candidate = name + std::to_string(i);
    }
    used.insert(candidate);
    out.merged.push_back(candidate);
    out.right_names.push_back(candidate);
  }
  return out;
}

std::vector<std::string> extract_tables(const Query& query) {
  std::set<std::string> out;
  collect_tables(query, {}, out);
  return {out.begin(), out.end()};
}

std::vector<std::string> extract_filter_columns(const Query& query) {
  std::set<std::string> out;
  for_each_query(query, [&out](const Query& q) {
    for (const auto& s : q.stages) {
      if (s.kind == StageKind::Where) collect_filter_columns(s.expr.get(), out);
    }
  });
  return {out.begin(), out.end()};
}

std::vector<std::string> extract_filter_literals(const Query& query) {
  std::set<std::string> out;
  for_each_query(query, [&out](const Query& q) {
    for (const auto& s : q.stages) {
      if (s.kind == StageKind::Where) {
        collect_filter_literals(s.expr.get(), out);
      }
    }
  });
  return {out.begin(), out.end()};
}

}  // namespace nl2kql::kql
