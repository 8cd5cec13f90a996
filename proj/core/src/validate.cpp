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
#include <algorithm>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nl2kql/analysis.hpp"

namespace nl2kql::kql {

namespace {

// Columns visible at a point in the pipeline. `open` marks a scope whose
// contents are unknowable (the source table did not resolve); lookups then
// succeed so one bad table name does not cascade into a column error per
// reference.
struct Scope {
  std::vector<std::string> cols;
  bool open = false;

  bool contains(std::string_view name) const {
    if (open) return true;
    return std::find(cols.begin(), cols.end(), name) != cols.end();
  }

  void add(const std::string& name) {
    if (name.empty()) return;
    if (std::find(cols.begin(), cols.end(), name) == cols.end()) {
      cols.push_back(name);
    }
  }
};

class Validator {
 public:
  Validator(const Schema& schema, std::vector<Diagnostic>& diags)
      : schema_(schema), diags_(diags) {}

  // Let bindings visible at a point in the query, lexically scoped.
  struct Env {
    std::unordered_set<std::string> scalars;
    std::unordered_map<std::string, Scope> tables;
  };

  Scope validate_query(const Query& q, Env env) {
    for (const auto& let : q.lets) {
      if (let.subquery) {
        Scope s = validate_query(*let.subquery, env);
        env.tables[let.name] = std::move(s);
      } else {
        if (let.value) {
          validate_expr(let.value.get(), Scope{}, env, false, false);
        }
        env.scalars.insert(let.name);
      }
    }
    Scope scope = source_scope(q.source.get(), env);
    for (const auto& stage : q.stages) {
      scope = apply_stage(stage, std::move(scope), env);
    }
    return scope;
  }

 private:
  void diag(std::string code, std::string message, Span span,
            std::string related) {
    diags_.push_back({Severity::Semantic, std::move(code), std::move(message),
                      span, std::move(related)});
  }

  Scope table_scope(const std::string& name, Span span, const Env& env) {
    auto it = env.tables.find(name);
    if (it != env.tables.end()) return it->second;
    const TableDef* table = schema_.find_table(name);
    if (table == nullptr) {
      diag("unknown-table", "unknown table '" + name + "'", span, name);
      Scope s;
      s.open = true;
      return s;
    }
    if (!table->accessible) {
      diag("inaccessible-table",
           "table '" + name + "' is outside the permission scope", span, name);
    }
    Scope s;
    for (const auto& col : table->columns) s.add(col.name);
    return s;
  }

  Scope source_scope(const TableExpression* te, const Env& env) {
    Scope s;
    if (te == nullptr) {
      s.open = true;
      return s;
    }
    switch (te->kind) {
      case TableExprKind::Table:
        return table_scope(te->table, te->span, env);
      case TableExprKind::Union: {
        for (const auto& name : te->union_tables) {
          Scope member = table_scope(name, te->span, env);
          if (member.open) s.open = true;
          for (const auto& col : member.cols) s.add(col);
        }
        return s;
      }
      case TableExprKind::Range:
        validate_expr(te->range_from.get(), Scope{}, env, false, false);
        validate_expr(te->range_to.get(), Scope{}, env, false, false);
        validate_expr(te->range_step.get(), Scope{}, env, false, false);
        s.add(te->range_var);
        return s;
      case TableExprKind::Subquery:
        if (te->subquery) return validate_query(*te->subquery, env);
        s.open = true;
        return s;
    }
    return s;
  }

  Scope apply_stage(const PipeStage& stage, Scope scope, const Env& env) {
    switch (stage.kind) {
      case StageKind::Where:
        validate_expr(stage.expr.get(), scope, env, false, false);
        return scope;
      case StageKind::Project: {
        Scope next;
        next.open = scope.open;
        for (std::size_t i = 0; i < stage.items.size(); ++i) {
          const auto& item = stage.items[i];
          validate_expr(item.expr.get(), scope, env, false, false);
          next.add(item.name.empty()
                       ? projected_auto_name(*item.expr, i)
                       : item.name);
        }
        return next;
      }
      case StageKind::Extend:
      case StageKind::BareAssign:
        for (std::size_t i = 0; i < stage.items.size(); ++i) {
          const auto& item = stage.items[i];
          validate_expr(item.expr.get(), scope, env, false, false);
          scope.add(item.name.empty()
                        ? projected_auto_name(*item.expr, i)
                        : item.name);
        }
        return scope;
      case StageKind::Summarize: {
        Scope next;
        next.open = scope.open;
        for (std::size_t i = 0; i < stage.by_keys.size(); ++i) {
          const auto& key = stage.by_keys[i];
          validate_expr(key.expr.get(), scope, env, false, false);
          next.add(key.name.empty() ? projected_auto_name(*key.expr, i)
                                    : key.name);
        }
        for (const auto& item : stage.items) {
          validate_expr(item.expr.get(), scope, env, true, false);
          if (!item.name.empty()) {
            next.add(item.name);
          } else if (item.expr &&
                     (item.expr->kind == ExprKind::FunctionCall) &&
                     is_aggregate_function(item.expr->name)) {
            next.add(aggregate_auto_name(*item.expr));
          } else if (item.expr) {
            next.add(projected_auto_name(*item.expr, next.cols.size()));
          }
        }
        return next;
      }
      case StageKind::OrderBy:
      case StageKind::Top:
        if (stage.kind == StageKind::Top) {
          validate_expr(stage.expr.get(), scope, env, false, false);
        }
        for (const auto& item : stage.order_items) {
          validate_expr(item.expr.get(), scope, env, false, false);
        }
        return scope;
      case StageKind::Take:
        validate_expr(stage.expr.get(), scope, env, false, false);
        return scope;
      case StageKind::Distinct: {
        if (stage.distinct_star) return scope;
        Scope next;
        next.open = scope.open;
        for (std::size_t i = 0; i < stage.items.size(); ++i) {
          const auto& item = stage.items[i];
          validate_expr(item.expr.get(), scope, env, false, false);
          next.add(item.name.empty()
                       ? projected_auto_name(*item.expr, i)
                       : item.name);
        }
        return next;
      }
      case StageKind::Join:
        return apply_join(stage, std::move(scope), env);
      case StageKind::MvExpand:
        validate_expr(stage.expr.get(), scope, env, false, false);
        scope.add(stage.mv_name);
        return scope;
      case StageKind::MvApply: {
        validate_expr(stage.expr.get(), scope, env, false, false);
        Scope body = scope;
        body.add(stage.mv_name);
        if (stage.mv_subquery) {
          if (stage.mv_subquery->source) {
            validate_query(*stage.mv_subquery, env);
          } else {
            for (const auto& s : stage.mv_subquery->stages) {
              body = apply_stage(s, std::move(body), env);
            }
          }
        }
        // The body reshapes only the expanded sub-table; the row scope after
        // mv-apply is approximated by the input scope plus the bound name.
        scope.add(stage.mv_name);
        return scope;
      }
      case StageKind::Serialize:
        for (std::size_t i = 0; i < stage.items.size(); ++i) {
          const auto& item = stage.items[i];
          validate_expr(item.expr.get(), scope, env, false, false);
          scope.add(item.name.empty()
                        ? projected_auto_name(*item.expr, i)
                        : item.name);
        }
        return scope;
      case StageKind::Count: {
        Scope next;
        next.add("Count");
        return next;
      }
      case StageKind::Render:
        return scope;
    }
    return scope;
  }

  Scope apply_join(const PipeStage& stage, Scope left, const Env& env) {
    Scope right;
    if (stage.join_right) {
      if (stage.join_right->kind == TableExprKind::Table) {
        right = table_scope(stage.join_right->table, stage.join_right->span,
                            env);
      } else {
        right = source_scope(stage.join_right.get(), env);
      }
    } else {
      right.open = true;
    }

    for (const auto& cond : stage.join_conditions) {
      validate_join_condition(cond.get(), left, right);
    }

    static const std::unordered_set<std::string_view> kLeftOnly = {
        "leftsemi", "leftanti", "leftantisemi"};
    static const std::unordered_set<std::string_view> kRightOnly = {
        "rightsemi", "rightanti", "rightantisemi"};
    if (kLeftOnly.count(stage.join_kind)) return left;
    if (kRightOnly.count(stage.join_kind)) return right;

    JoinColumnMerge merge = merge_join_columns(left.cols, right.cols);
    Scope out;
    out.open = left.open || right.open;
    out.cols = std::move(merge.merged);
    return out;
  }

  // A join condition must compare columns for equality: either a bare column
  // present on both sides or `$left.X == $right.Y`.
  void validate_join_condition(const Expr* cond, const Scope& left,
                               const Scope& right) {
    if (cond == nullptr) return;
    if (cond->kind == ExprKind::ColumnRef) {
      if (!left.contains(cond->name)) {
        diag("unknown-column",
             "join column '" + cond->name + "' not on the left side",
             cond->span, cond->name);
      }
      if (!right.contains(cond->name)) {
        diag("unknown-column",
             "join column '" + cond->name + "' not on the right side",
             cond->span, cond->name);
      }
      return;
    }
    if (cond->kind == ExprKind::Binary && cond->name == "==" &&
        cond->args.size() == 2) {
      bool ok = validate_join_side(cond->args[0].get(), left, right) &&
                validate_join_side(cond->args[1].get(), left, right);
      if (ok) return;
    }
    diag("join-non-equality", "join condition must be a column equality",
         cond->span, "");
  }

  // Returns false when the operand is not a column reference at all; column
  // resolution problems are reported here and still count as an equality.
  bool validate_join_side(const Expr* side, const Scope& left,
                          const Scope& right) {
    if (side == nullptr) return false;
    if (side->kind == ExprKind::ColumnRef) {
      if (!left.contains(side->name) && !right.contains(side->name)) {
        diag("unknown-column",
             "join column '" + side->name + "' not on either side",
             side->span, side->name);
      }
      return true;
    }
    if (side->kind == ExprKind::PropertyAccess && !side->args.empty() &&
        side->args[0] && side->args[0]->kind == ExprKind::ColumnRef) {
      const std::string& base = side->args[0]->name;
      if (base == "$left") {
        if (!left.contains(side->name)) {
          diag("unknown-column",
               "join column '" + side->name + "' not on the left side",
               side->span, side->name);
        }
        return true;
      }
      if (base == "$right") {
        if (!right.contains(side->name)) {
          diag("unknown-column",
               "join column '" + side->name + "' not on the right side",
               side->span, side->name);
        }
        return true;
      }
    }
    return false;
  }

  void validate_expr(const Expr* e, const Scope& scope, const Env& env,
                     bool aggregates_ok, bool in_aggregate) {
    if (e == nullptr) return;
    switch (e->kind) {
      case ExprKind::ColumnRef:
        if (!scope.contains(e->name) && !env.scalars.count(e->name)) {
          diag("unknown-column", "unknown column '" + e->name + "'", e->span,
               e->name);
        }
        return;
      case ExprKind::Literal:
        return;
      case ExprKind::Unary:
      case ExprKind::Binary:
      case ExprKind::Case:
      case ExprKind::List:
        for (const auto& arg : e->args) {
          validate_expr(arg.get(), scope, env, aggregates_ok, in_aggregate);
        }
        return;
      case ExprKind::Between:
        if (e->args.size() < 3) {
          diag("between-missing-range", "between requires a low .. high range",
               e->span, "");
        }
        for (const auto& arg : e->args) {
          validate_expr(arg.get(), scope, env, aggregates_ok, in_aggregate);
        }
        return;
      case ExprKind::FunctionCall:
        if (is_aggregate_function(e->name)) {
          if (in_aggregate) {
            diag("nested-aggregate",
                 "aggregate '" + e->name + "' nested inside an aggregate",
                 e->span, e->name);
            return;
          }
          if (!aggregates_ok) {
            diag("aggregate-outside-summarize",
                 "aggregate '" + e->name + "' outside summarize", e->span,
                 e->name);
            return;  // arguments are not columns of this stage's scope
          }
          for (const auto& arg : e->args) {
            validate_expr(arg.get(), scope, env, false, true);
          }
          return;
        }
        for (const auto& arg : e->args) {
          validate_expr(arg.get(), scope, env, aggregates_ok, in_aggregate);
        }
        return;
      case ExprKind::PropertyAccess: {
        // Only the root of a property path names a column; the rest are
        // dynamic fields that the schema does not describe.
        const Expr* root = e;
        while (root->kind == ExprKind::PropertyAccess && !root->args.empty() &&
               root->args[0]) {
          root = root->args[0].get();
        }
        validate_expr(root, scope, env, aggregates_ok, in_aggregate);
        return;
      }
      case ExprKind::Subquery:
        if (e->subquery) validate_query(*e->subquery, env);
        return;
    }
  }

  const Schema& schema_;
  std::vector<Diagnostic>& diags_;
};

}  // namespace

std::vector<Diagnostic> validate(const Query& query, const Schema& schema) {
  std::vector<Diagnostic> diags;
  Validator v(schema, diags);
  v.validate_query(query, Validator::Env{});
  return diags;
}

std::vector<std::string> output_columns(const Query& query,
                                        const Schema& schema) {
  std::vector<Diagnostic> ignored;
  Validator v(schema, ignored);
  return v.validate_query(query, Validator::Env{}).cols;
}

}  // namespace nl2kql::kql
