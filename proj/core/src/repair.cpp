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
#include "nl2kql/repair.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <utility>

#include "nl2kql/analysis.hpp"
#include "nl2kql/parser.hpp"
#include "nl2kql/render.hpp"

namespace nl2kql::repair {

namespace {

using kql::Diagnostic;
using kql::Expr;
using kql::ExprKind;
using kql::NamedExpr;
using kql::PipeStage;
using kql::Query;
using kql::StageKind;
using kql::TableExpression;

std::vector<Diagnostic> all_diagnostics(const kql::ParseResult& parsed,
                                        const Schema& schema) {
  std::vector<Diagnostic> diags = parsed.diagnostics;
  std::vector<Diagnostic> semantic = kql::validate(parsed.query, schema);
  diags.insert(diags.end(), std::make_move_iterator(semantic.begin()),
               std::make_move_iterator(semantic.end()));
  return diags;
}

bool has_code(const std::vector<Diagnostic>& diags, std::string_view code) {
  return std::any_of(diags.begin(), diags.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

// ---------------------------------------------------------------- extend ---

void flip_bare_assigns_expr(Expr* e, bool& changed);

void flip_bare_assigns_query(Query& q, bool& changed) {
  for (auto& let : q.lets) {
    if (let.subquery) flip_bare_assigns_query(*let.subquery, changed);
    if (let.value) flip_bare_assigns_expr(let.value.get(), changed);
  }
  if (q.source && q.source->subquery) {
    flip_bare_assigns_query(*q.source->subquery, changed);
  }
  for (auto& stage : q.stages) {
    if (stage.kind == StageKind::BareAssign) {
      stage.kind = StageKind::Extend;
      changed = true;
    }
    if (stage.expr) flip_bare_assigns_expr(stage.expr.get(), changed);
    for (auto& item : stage.items) {
      flip_bare_assigns_expr(item.expr.get(), changed);
    }
    for (auto& key : stage.by_keys) {
      flip_bare_assigns_expr(key.expr.get(), changed);
    }
    for (auto& item : stage.order_items) {
      flip_bare_assigns_expr(item.expr.get(), changed);
    }
    for (auto& cond : stage.join_conditions) {
      flip_bare_assigns_expr(cond.get(), changed);
    }
    if (stage.join_right && stage.join_right->subquery) {
      flip_bare_assigns_query(*stage.join_right->subquery, changed);
    }
    if (stage.mv_subquery) flip_bare_assigns_query(*stage.mv_subquery, changed);
  }
}

void flip_bare_assigns_expr(Expr* e, bool& changed) {
  if (e == nullptr) return;
  for (auto& arg : e->args) flip_bare_assigns_expr(arg.get(), changed);
  if (e->subquery) flip_bare_assigns_query(*e->subquery, changed);
}

// ------------------------------------------------------------- summarize ---

bool contains_aggregate(const Expr* e) {
  if (e == nullptr) return false;
  if (e->kind == ExprKind::FunctionCall &&
      kql::is_aggregate_function(e->name)) {
    return true;
  }
  if (e->kind == ExprKind::Subquery) return false;  // its own scope
  for (const auto& arg : e->args) {
    if (contains_aggregate(arg.get())) return true;
  }
  return false;
}

// Moves every outermost aggregate call out of the expression tree into
// `items`, leaving a column reference to the aggregate's output name behind.
// Textually identical calls share one summarize item.
void hoist_aggregates(std::unique_ptr<Expr>& slot,
                      std::vector<NamedExpr>& items,
                      std::map<std::string, std::string>& names) {
  if (!slot) return;
  if (slot->kind == ExprKind::FunctionCall &&
      kql::is_aggregate_function(slot->name)) {
    std::string text = kql::render_expr(*slot);
    auto it = names.find(text);
    std::string column;
    if (it == names.end()) {
      column = kql::aggregate_auto_name(*slot);
      names.emplace(text, column);
      NamedExpr item;
      item.name = column;
      item.expr = std::move(slot);
      items.push_back(std::move(item));
    } else {
      column = it->second;
    }
    auto ref = std::make_unique<Expr>();
    ref->kind = ExprKind::ColumnRef;
    ref->name = column;
    slot = std::move(ref);
    return;
  }
  if (slot->kind == ExprKind::Subquery) return;
  for (auto& arg : slot->args) hoist_aggregates(arg, items, names);
}

// Bare column references in the expression, in first-appearance order.
void collect_columns(const Expr* e, std::vector<std::string>& out,
                     std::set<std::string>& seen) {
  if (e == nullptr) return;
  if (e->kind == ExprKind::ColumnRef) {
    if (e->name != "$left" && e->name != "$right" && seen.insert(e->name).second) {
      out.push_back(e->name);
    }
    return;
  }
  if (e->kind == ExprKind::Subquery) return;
  if (e->kind == ExprKind::PropertyAccess) {
    if (!e->args.empty()) collect_columns(e->args[0].get(), out, seen);
    return;
  }
  for (const auto& arg : e->args) collect_columns(arg.get(), out, seen);
}

// Rewrites the first stage holding an aggregate where none is allowed.
// A filter gains a summarize stage in front of it, grouped by the other
// columns the predicate mentions; a projection-like stage becomes the
// summarize itself.
bool fix_missing_summarize(Query& q) {
  for (std::size_t i = 0; i < q.stages.size(); ++i) {
    PipeStage& stage = q.stages[i];
    switch (stage.kind) {
      case StageKind::Where: {
        if (!contains_aggregate(stage.expr.get())) break;
        std::vector<NamedExpr> items;
        std::map<std::string, std::string> names;
        hoist_aggregates(stage.expr, items, names);
        std::set<std::string> aggregate_names;
        for (const auto& item : items) aggregate_names.insert(item.name);

        PipeStage summarize;
        summarize.kind = StageKind::Summarize;
        summarize.items = std::move(items);
        std::vector<std::string> keys;
        std::set<std::string> seen = aggregate_names;
        collect_columns(stage.expr.get(), keys, seen);
        for (auto& key : keys) {
          NamedExpr by;
          by.expr = std::make_unique<Expr>();
          by.expr->kind = ExprKind::ColumnRef;
          by.expr->name = std::move(key);
          summarize.by_keys.push_back(std::move(by));
        }
        q.stages.insert(q.stages.begin() + static_cast<std::ptrdiff_t>(i),
                        std::move(summarize));
        return true;
      }
      case StageKind::Project:
      case StageKind::Extend:
      case StageKind::BareAssign: {
        bool any = false;
        for (const auto& item : stage.items) {
          if (contains_aggregate(item.expr.get())) any = true;
        }
        if (!any) break;
        stage.kind = StageKind::Summarize;
        return true;
      }
      default:
        break;
    }
    // Nested pipelines get the same treatment when the outer stages are fine.
    if (stage.join_right && stage.join_right->subquery &&
        fix_missing_summarize(*stage.join_right->subquery)) {
      return true;
    }
    if (stage.mv_subquery && fix_missing_summarize(*stage.mv_subquery)) {
      return true;
    }
  }
  for (auto& let : q.lets) {
    if (let.subquery && fix_missing_summarize(*let.subquery)) return true;
  }
  if (q.source && q.source->subquery &&
      fix_missing_summarize(*q.source->subquery)) {
    return true;
  }
  return false;
}

// ------------------------------------------------------------ identifier ---

void rename_column_expr(Expr* e, const std::string& from,
                        const std::string& to);

void rename_column_query(Query& q, const std::string& from,
                         const std::string& to) {
  for (auto& let : q.lets) {
    if (let.subquery) rename_column_query(*let.subquery, from, to);
    if (let.value) rename_column_expr(let.value.get(), from, to);
  }
  if (q.source) {
    if (q.source->subquery) rename_column_query(*q.source->subquery, from, to);
    rename_column_expr(q.source->range_from.get(), from, to);
    rename_column_expr(q.source->range_to.get(), from, to);
    rename_column_expr(q.source->range_step.get(), from, to);
  }
  for (auto& stage : q.stages) {
    rename_column_expr(stage.expr.get(), from, to);
    for (auto& item : stage.items) rename_column_expr(item.expr.get(), from, to);
    for (auto& key : stage.by_keys) {
      rename_column_expr(key.expr.get(), from, to);
    }
    for (auto& item : stage.order_items) {
      rename_column_expr(item.expr.get(), from, to);
    }
    for (auto& cond : stage.join_conditions) {
      rename_column_expr(cond.get(), from, to);
    }
    if (stage.join_right && stage.join_right->subquery) {
      rename_column_query(*stage.join_right->subquery, from, to);
    }
    if (stage.mv_subquery) rename_column_query(*stage.mv_subquery, from, to);
  }
}

void rename_column_expr(Expr* e, const std::string& from,
                        const std::string& to) {
  if (e == nullptr) return;
  if (e->kind == ExprKind::ColumnRef && e->name == from) e->name = to;
  // `$left.X` / `$right.X` reference the column through a property access.
  if (e->kind == ExprKind::PropertyAccess && e->name == from &&
      !e->args.empty() && e->args[0] &&
      e->args[0]->kind == ExprKind::ColumnRef &&
      (e->args[0]->name == "$left" || e->args[0]->name == "$right")) {
    e->name = to;
  }
  for (auto& arg : e->args) rename_column_expr(arg.get(), from, to);
  if (e->subquery) rename_column_query(*e->subquery, from, to);
}

void rename_table_expr(Expr* e, const std::string& from, const std::string& to);

void rename_table_te(TableExpression* te, const std::string& from,
                     const std::string& to);

void rename_table_query(Query& q, const std::string& from,
                        const std::string& to) {
  for (auto& let : q.lets) {
    if (let.subquery) rename_table_query(*let.subquery, from, to);
    if (let.value) rename_table_expr(let.value.get(), from, to);
  }
  rename_table_te(q.source.get(), from, to);
  for (auto& stage : q.stages) {
    rename_table_expr(stage.expr.get(), from, to);
    for (auto& item : stage.items) rename_table_expr(item.expr.get(), from, to);
    for (auto& key : stage.by_keys) {
      rename_table_expr(key.expr.get(), from, to);
    }
    for (auto& item : stage.order_items) {
      rename_table_expr(item.expr.get(), from, to);
    }
    for (auto& cond : stage.join_conditions) {
      rename_table_expr(cond.get(), from, to);
    }
    rename_table_te(stage.join_right.get(), from, to);
    if (stage.mv_subquery) rename_table_query(*stage.mv_subquery, from, to);
  }
}

void rename_table_te(TableExpression* te, const std::string& from,
                     const std::string& to) {
  if (te == nullptr) return;
  if (te->table == from) te->table = to;
  for (auto& name : te->union_tables) {
    if (name == from) name = to;
  }
  if (te->subquery) rename_table_query(*te->subquery, from, to);
}

void rename_table_expr(Expr* e, const std::string& from,
                       const std::string& to) {
  if (e == nullptr) return;
  for (auto& arg : e->args) rename_table_expr(arg.get(), from, to);
  if (e->subquery) rename_table_query(*e->subquery, from, to);
}

// Column candidates come from the tables the query actually references;
// table candidates only from tables inside the permission scope, so a
// rename can never smuggle in an inaccessible table.
std::vector<SubstituteCandidate> column_candidates(const Query& q,
                                                   const Schema& schema) {
  std::vector<SubstituteCandidate> out;
  std::set<std::string> seen;
  for (const auto& table_name : kql::extract_tables(q)) {
    const TableDef* table = schema.find_table(table_name);
    if (table == nullptr) continue;
    for (const auto& column : table->columns) {
      if (seen.insert(column.name).second) {
        out.push_back({column.name, camel_split(column.name)});
      }
    }
  }
  return out;
}

std::vector<SubstituteCandidate> table_candidates(const Schema& schema) {
  std::vector<SubstituteCandidate> out;
  for (const auto& table : schema.tables) {
    if (table.accessible) {
      out.push_back({table.name, camel_split(table.name)});
    }
  }
  return out;
}

// Fixes the first unresolved table or column by renaming it to its closest
// schema match. Returns false when nothing clears the similarity bar.
// EmbedError propagates to the caller, which disables the rule.
bool fix_undefined_identifier(Query& q, const std::vector<Diagnostic>& diags,
                              const Schema& schema,
                              embed::EmbeddingProvider& provider,
                              double threshold) {
  for (const auto& diag : diags) {
    if (diag.related_identifier.empty()) continue;
    if (diag.code == "unknown-table") {
      auto best = substitute_identifier(diag.related_identifier,
                                        table_candidates(schema), provider,
                                        threshold);
      if (best) {
        rename_table_query(q, diag.related_identifier, *best);
        return true;
      }
    } else if (diag.code == "unknown-column") {
      auto best = substitute_identifier(diag.related_identifier,
                                        column_candidates(q, schema), provider,
                                        threshold);
      if (best) {
        rename_column_query(q, diag.related_identifier, *best);
        return true;
      }
    }
  }
  return false;
}

}  // namespace

std::string camel_split(const std::string& identifier) {
  std::string out;
  out.reserve(identifier.size() + 4);
  for (std::size_t i = 0; i < identifier.size(); ++i) {
    unsigned char prev = i ? static_cast<unsigned char>(identifier[i - 1]) : 0;
    unsigned char cur = static_cast<unsigned char>(identifier[i]);
    if (i && std::isupper(cur) && (std::islower(prev) || std::isdigit(prev))) {
      out += ' ';
    }
    out += static_cast<char>(cur);
  }
  return out;
}

std::optional<std::string> substitute_identifier(
    const std::string& bad, const std::vector<SubstituteCandidate>& scope,
    embed::EmbeddingProvider& provider, double threshold) {
  if (scope.empty()) return std::nullopt;
  std::vector<std::string> texts;
  texts.reserve(scope.size() + 1);
  texts.push_back(camel_split(bad));
  for (const auto& candidate : scope) texts.push_back(candidate.description);
  std::vector<embed::Vector> vectors = provider.embed_batch(texts);
  if (vectors.size() != texts.size()) {
    throw embed::EmbedError("embedding batch returned " +
                            std::to_string(vectors.size()) + " vectors for " +
                            std::to_string(texts.size()) + " inputs");
  }
  const std::string* best = nullptr;
  double best_score = 0.0;
  for (std::size_t i = 0; i < scope.size(); ++i) {
    double score = embed::cosine(vectors[0], vectors[i + 1]);
    if (best == nullptr || score > best_score ||
        (score == best_score && scope[i].name < *best)) {
      best = &scope[i].name;
      best_score = score;
    }
  }
  if (best == nullptr || best_score < threshold) return std::nullopt;
  return *best;
}

RepairOutcome repair(const std::string& kql_text, const Schema& schema,
                     embed::EmbeddingProvider& provider,
                     const RepairOptions& options) {
  const std::size_t max_iterations = std::max<std::size_t>(1, options.max_iterations);

  kql::ParseResult parsed = kql::parse(kql_text);
  std::vector<Diagnostic> diags = all_diagnostics(parsed, schema);

  RepairOutcome outcome;
  if (diags.empty()) {
    // Nothing to do; hand the text back byte-for-byte.
    outcome.final_kql = kql_text;
    outcome.fixed = true;
    return outcome;
  }

  const std::vector<Diagnostic> original_diags = diags;
  std::string current = kql_text;
  std::set<std::string> disabled;

  while (outcome.iterations < max_iterations && !diags.empty()) {
    // First enabled rule whose trigger diagnostic is present.
    const char* rule = nullptr;
    if (!disabled.count(kRuleBetweenParens) &&
        has_code(diags, "between-missing-parens")) {
      rule = kRuleBetweenParens;
    } else if (!disabled.count(kRuleMissingExtend) &&
               has_code(diags, "bare-assignment-stage")) {
      rule = kRuleMissingExtend;
    } else if (!disabled.count(kRuleMissingSummarize) &&
               has_code(diags, "aggregate-outside-summarize")) {
      rule = kRuleMissingSummarize;
    } else if (!disabled.count(kRuleUndefinedIdentifier) &&
               (has_code(diags, "unknown-column") ||
                has_code(diags, "unknown-table"))) {
      rule = kRuleUndefinedIdentifier;
    }
    if (rule == nullptr) break;

    bool edited = false;
    if (rule == kRuleBetweenParens) {
      // The parser already recovered the range; canonical rendering adds
      // the parentheses.
      edited = true;
    } else if (rule == kRuleMissingExtend) {
      flip_bare_assigns_query(parsed.query, edited);
    } else if (rule == kRuleMissingSummarize) {
      edited = fix_missing_summarize(parsed.query);
    } else {
      try {
        edited = fix_undefined_identifier(parsed.query, diags, schema,
                                          provider,
                                          options.substitution_threshold);
      } catch (const embed::EmbedError&) {
        // Similarity scoring is unavailable; structural rules still apply.
        disabled.insert(rule);
        continue;
      }
    }
    if (!edited) {
      disabled.insert(rule);
      continue;
    }

    ++outcome.iterations;
    std::string candidate_text = kql::render(parsed.query);
    kql::ParseResult candidate = kql::parse(candidate_text);
    std::vector<Diagnostic> candidate_diags =
        all_diagnostics(candidate, schema);

    if (candidate_text == current || candidate_diags.size() > diags.size()) {
      // The edit made things worse (or changed nothing); put the previous
      // text back and stop trying this rule.
      disabled.insert(rule);
      parsed = kql::parse(current);
      diags = all_diagnostics(parsed, schema);
      continue;
    }

    current = std::move(candidate_text);
    parsed = std::move(candidate);
    diags = std::move(candidate_diags);
    outcome.applied_rules.push_back(rule);
  }

  if (diags.empty()) {
    outcome.final_kql = std::move(current);
    outcome.fixed = true;
    return outcome;
  }
  // Unfixable: never hand back a half-rewritten query.
  outcome.final_kql = kql_text;
  outcome.fixed = false;
  outcome.remaining = original_diags;
  return outcome;
}

}  // namespace nl2kql::repair
