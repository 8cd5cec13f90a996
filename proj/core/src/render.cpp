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
#include "nl2kql/render.hpp"

#include <cctype>
#include <string>

#include "nl2kql/lexer.hpp"

namespace nl2kql::kql {

namespace {

bool is_plain_identifier(const std::string& name) {
  if (name.empty() || is_keyword(name)) return false;
  auto head = static_cast<unsigned char>(name[0]);
  if (!std::isalpha(head) && name[0] != '_' && name[0] != '$') return false;
  for (char c : name) {
    auto uc = static_cast<unsigned char>(c);
    if (!std::isalnum(uc) && c != '_' && c != '$') return false;
  }
  return true;
}

std::string render_name(const std::string& name) {
  if (is_plain_identifier(name)) return name;
  std::string out = "['";
  for (char c : name) {
    if (c == '\\' || c == '\'') out.push_back('\\');
    out.push_back(c);
  }
  out += "']";
  return out;
}

// Binding strength, loosest first. Children rendered at a tighter minimum
// get parentheses, which keeps reparses structurally identical.
int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Binary:
      if (e.name == "or") return 1;
      if (e.name == "and") return 2;
      if (e.name == "+" || e.name == "-") return 4;
      if (e.name == "*" || e.name == "/") return 5;
      return 3;  // comparisons, in, has, contains, matches regex
    case ExprKind::Between:
      return 3;
    case ExprKind::Unary:
      return 6;
    default:
      return 7;
  }
}

std::string render_query_inline(const Query& query);

std::string render_at(const Expr* e, int min_prec) {
  if (e == nullptr) return "";
  int prec = precedence(*e);
  std::string body;
  switch (e->kind) {
    case ExprKind::ColumnRef:
      body = render_name(e->name);
      break;
    case ExprKind::Literal:
      body = e->literal_text;
      break;
    case ExprKind::Unary:
      body = e->name + render_at(e->args.empty() ? nullptr : e->args[0].get(), 6);
      break;
    case ExprKind::Binary: {
      const Expr* lhs = e->args.size() > 0 ? e->args[0].get() : nullptr;
      const Expr* rhs = e->args.size() > 1 ? e->args[1].get() : nullptr;
      body = render_at(lhs, prec) + " " + e->name + " " +
             render_at(rhs, prec + 1);
      break;
    }
    case ExprKind::Between: {
      const Expr* value = e->args.size() > 0 ? e->args[0].get() : nullptr;
      const Expr* low = e->args.size() > 1 ? e->args[1].get() : nullptr;
      const Expr* high = e->args.size() > 2 ? e->args[2].get() : nullptr;
      body = render_at(value, 4) + " between (" + render_at(low, 4) + " .. " +
             render_at(high, 4) + ")";
      break;
    }
    case ExprKind::Case:
    case ExprKind::FunctionCall: {
      body = render_name(e->name);
      if (e->kind == ExprKind::Case) body = "case";
      body += "(";
      for (std::size_t i = 0; i < e->args.size(); ++i) {
        if (i) body += ", ";
        body += render_at(e->args[i].get(), 1);
      }
      body += ")";
      break;
    }
    case ExprKind::PropertyAccess:
      body = render_at(e->args.empty() ? nullptr : e->args[0].get(), 7) + "." +
             render_name(e->name);
      break;
    case ExprKind::List: {
      body = "(";
      for (std::size_t i = 0; i < e->args.size(); ++i) {
        if (i) body += ", ";
        body += render_at(e->args[i].get(), 1);
      }
      body += ")";
      break;
    }
    case ExprKind::Subquery:
      body = "(" + (e->subquery ? render_query_inline(*e->subquery) : "") + ")";
      break;
  }
  if (prec < min_prec && e->kind != ExprKind::Subquery &&
      e->kind != ExprKind::List) {
    return "(" + body + ")";
  }
  return body;
}

std::string render_named_list(const std::vector<NamedExpr>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    if (!items[i].name.empty()) out += render_name(items[i].name) + " = ";
    out += render_at(items[i].expr.get(), 1);
  }
  return out;
}

std::string render_order_items(const std::vector<OrderItem>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += render_at(items[i].expr.get(), 1);
    if (items[i].direction == SortDirection::Asc) out += " asc";
    if (items[i].direction == SortDirection::Desc) out += " desc";
  }
  return out;
}

std::string render_table_expression(const TableExpression& te) {
  switch (te.kind) {
    case TableExprKind::Table:
      return render_name(te.table);
    case TableExprKind::Union: {
      std::string out = "union ";
      for (std::size_t i = 0; i < te.union_tables.size(); ++i) {
        if (i) out += ", ";
        out += render_name(te.union_tables[i]);
      }
      return out;
    }
    case TableExprKind::Range:
      return "range " + render_name(te.range_var) + " from " +
             render_at(te.range_from.get(), 1) + " to " +
             render_at(te.range_to.get(), 1) + " step " +
             render_at(te.range_step.get(), 1);
    case TableExprKind::Subquery:
      return "(" + (te.subquery ? render_query_inline(*te.subquery) : "") + ")";
  }
  return "";
}

std::string render_stage(const PipeStage& s) {
  switch (s.kind) {
    case StageKind::Where:
      return "where " + render_at(s.expr.get(), 1);
    case StageKind::Project:
      return "project " + render_named_list(s.items);
    case StageKind::Extend:
      return "extend " + render_named_list(s.items);
    case StageKind::Summarize: {
      std::string out = "summarize";
      if (!s.items.empty()) out += " " + render_named_list(s.items);
      if (!s.by_keys.empty()) out += " by " + render_named_list(s.by_keys);
      return out;
    }
    case StageKind::OrderBy:
      return s.keyword + " by " + render_order_items(s.order_items);
    case StageKind::Take:
      return s.keyword + " " + render_at(s.expr.get(), 1);
    case StageKind::Top:
      return "top " + render_at(s.expr.get(), 1) + " by " +
             render_order_items(s.order_items);
    case StageKind::Distinct:
      if (s.distinct_star) return "distinct *";
      return "distinct " + render_named_list(s.items);
    case StageKind::Join: {
      std::string out = "join ";
      if (!s.join_kind.empty()) out += "kind=" + s.join_kind + " ";
      if (s.join_right) {
        if (s.join_right->kind == TableExprKind::Table) {
          out += render_name(s.join_right->table);
        } else {
          out += render_table_expression(*s.join_right);
        }
      }
      out += " on ";
      for (std::size_t i = 0; i < s.join_conditions.size(); ++i) {
        if (i) out += ", ";
        out += render_at(s.join_conditions[i].get(), 1);
      }
      return out;
    }
    case StageKind::MvExpand:
    case StageKind::MvApply: {
      std::string out = s.kind == StageKind::MvExpand ? "mv-expand " : "mv-apply ";
      if (!s.mv_name.empty()) out += render_name(s.mv_name) + " = ";
      out += render_at(s.expr.get(), 1);
      if (!s.mv_typeof.empty()) out += " to typeof(" + s.mv_typeof + ")";
      if (s.kind == StageKind::MvApply) {
        out += " on (" +
               (s.mv_subquery ? render_query_inline(*s.mv_subquery) : "") + ")";
      }
      return out;
    }
    case StageKind::Serialize: {
      std::string out = "serialize";
      if (!s.items.empty()) out += " " + render_named_list(s.items);
      return out;
    }
    case StageKind::Count:
      return "count";
    case StageKind::Render:
      return "render " + s.render_kind;
    case StageKind::BareAssign:
      return render_named_list(s.items);
  }
  return "";
}

std::string render_let(const LetBinding& let) {
  std::string out = "let " + render_name(let.name) + " = ";
  if (let.subquery) {
    out += render_query_inline(*let.subquery);
  } else {
    out += render_at(let.value.get(), 1);
  }
  out += ";";
  return out;
}

std::string render_query_inline(const Query& query) {
  std::string out;
  for (const auto& let : query.lets) {
    out += render_let(let) + " ";
  }
  if (query.source) out += render_table_expression(*query.source);
  for (std::size_t i = 0; i < query.stages.size(); ++i) {
    if (!out.empty()) out += " ";
    out += "| " + render_stage(query.stages[i]);
  }
  return out;
}

// ---- structural dump ------------------------------------------------------

void append_quoted(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
}

void dump_query(std::string& out, const Query& query);

void dump_expr(std::string& out, const Expr* e) {
  if (e == nullptr) {
    out += "nil";
    return;
  }
  switch (e->kind) {
    case ExprKind::ColumnRef:
      out += "(col ";
      append_quoted(out, e->name);
      out += ")";
      return;
    case ExprKind::Literal:
      out += "(lit ";
      switch (e->literal_kind) {
        case LiteralKind::String:
          out += "str ";
          append_quoted(out, e->string_value);
          break;
        case LiteralKind::Number:
          out += "num ";
          append_quoted(out, e->literal_text);
          break;
        case LiteralKind::Bool:
          out += "bool ";
          append_quoted(out, e->literal_text);
          break;
        case LiteralKind::DateTime:
          out += "datetime ";
          append_quoted(out, e->literal_text);
          break;
        case LiteralKind::Timespan:
          out += "timespan ";
          append_quoted(out, e->literal_text);
          break;
      }
      out += ")";
      return;
    case ExprKind::Unary:
      out += "(unary ";
      break;
    case ExprKind::Binary:
      out += "(bin ";
      break;
    case ExprKind::Between:
      out += "(between ";
      break;
    case ExprKind::FunctionCall:
      out += "(call ";
      break;
    case ExprKind::Case:
      out += "(case ";
      break;
    case ExprKind::PropertyAccess:
      out += "(prop ";
      break;
    case ExprKind::List:
      out += "(list ";
      break;
    case ExprKind::Subquery:
      out += "(subquery ";
      if (e->subquery) {
        dump_query(out, *e->subquery);
      } else {
        out += "nil";
      }
      out += ")";
      return;
  }
  append_quoted(out, e->name);
  for (const auto& arg : e->args) {
    out += " ";
    dump_expr(out, arg.get());
  }
  out += ")";
}

void dump_named_list(std::string& out, const std::vector<NamedExpr>& items) {
  out += "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += " ";
    out += "(item ";
    append_quoted(out, items[i].name);
    out += " ";
    dump_expr(out, items[i].expr.get());
    out += ")";
  }
  out += ")";
}

void dump_table_expression(std::string& out, const TableExpression* te) {
  if (te == nullptr) {
    out += "nil";
    return;
  }
  switch (te->kind) {
    case TableExprKind::Table:
      out += "(table ";
      append_quoted(out, te->table);
      out += ")";
      return;
    case TableExprKind::Union:
      out += "(union";
      for (const auto& t : te->union_tables) {
        out += " ";
        append_quoted(out, t);
      }
      out += ")";
      return;
    case TableExprKind::Range:
      out += "(range ";
      append_quoted(out, te->range_var);
      out += " ";
      dump_expr(out, te->range_from.get());
      out += " ";
      dump_expr(out, te->range_to.get());
      out += " ";
      dump_expr(out, te->range_step.get());
      out += ")";
      return;
    case TableExprKind::Subquery:
      out += "(src-subquery ";
      if (te->subquery) {
        dump_query(out, *te->subquery);
      } else {
        out += "nil";
      }
      out += ")";
      return;
  }
}

void dump_stage(std::string& out, const PipeStage& s) {
  out += "(stage ";
  append_quoted(out, s.keyword);
  switch (s.kind) {
    case StageKind::Where:
    case StageKind::Take:
      out += " ";
      dump_expr(out, s.expr.get());
      break;
    case StageKind::Project:
    case StageKind::Extend:
    case StageKind::BareAssign:
    case StageKind::Serialize:
      out += " ";
      dump_named_list(out, s.items);
      break;
    case StageKind::Summarize:
      out += " ";
      dump_named_list(out, s.items);
      out += " by ";
      dump_named_list(out, s.by_keys);
      break;
    case StageKind::OrderBy:
    case StageKind::Top:
      if (s.kind == StageKind::Top) {
        out += " ";
        dump_expr(out, s.expr.get());
      }
      out += " (order";
      for (const auto& item : s.order_items) {
        out += " (";
        dump_expr(out, item.expr.get());
        out += item.direction == SortDirection::Asc    ? " asc"
               : item.direction == SortDirection::Desc ? " desc"
                                                       : " default";
        out += ")";
      }
      out += ")";
      break;
    case StageKind::Distinct:
      out += s.distinct_star ? " *" : " ";
      if (!s.distinct_star) dump_named_list(out, s.items);
      break;
    case StageKind::Join:
      out += " kind=";
      append_quoted(out, s.join_kind);
      out += " ";
      dump_table_expression(out, s.join_right.get());
      out += " on (";
      for (std::size_t i = 0; i < s.join_conditions.size(); ++i) {
        if (i) out += " ";
        dump_expr(out, s.join_conditions[i].get());
      }
      out += ")";
      break;
    case StageKind::MvExpand:
    case StageKind::MvApply:
      out += " ";
      append_quoted(out, s.mv_name);
      out += " ";
      dump_expr(out, s.expr.get());
      out += " typeof=";
      append_quoted(out, s.mv_typeof);
      if (s.kind == StageKind::MvApply) {
        out += " on ";
        if (s.mv_subquery) {
          dump_query(out, *s.mv_subquery);
        } else {
          out += "nil";
        }
      }
      break;
    case StageKind::Count:
      break;
    case StageKind::Render:
      out += " ";
      append_quoted(out, s.render_kind);
      break;
  }
  out += ")";
}

void dump_query(std::string& out, const Query& query) {
  out += "(query (lets";
  for (const auto& let : query.lets) {
    out += " (let ";
    append_quoted(out, let.name);
    out += " ";
    if (let.subquery) {
      dump_query(out, *let.subquery);
    } else {
      dump_expr(out, let.value.get());
    }
    out += ")";
  }
  out += ") ";
  dump_table_expression(out, query.source.get());
  for (const auto& stage : query.stages) {
    out += " ";
    dump_stage(out, stage);
  }
  out += ")";
}

}  // namespace

std::string render(const Query& query) {
  std::string out;
  for (const auto& let : query.lets) {
    out += render_let(let);
    out += "\n";
  }
  if (query.source) out += render_table_expression(*query.source);
  for (const auto& stage : query.stages) {
    if (!out.empty()) out += "\n";
    out += "| " + render_stage(stage);
  }
  return out;
}

std::string render_expr(const Expr& expr) { return render_at(&expr, 1); }

std::string dump(const Query& query) {
  std::string out;
  dump_query(out, query);
  return out;
}

bool structurally_equal(const Query& a, const Query& b) {
  return dump(a) == dump(b);
}

}  // namespace nl2kql::kql
