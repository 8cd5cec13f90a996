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

#include <string>

#include "doctest.h"
#include "test_util.hpp"

using namespace nl2kql::kql;

namespace {

bool has_code(const std::vector<Diagnostic>& diags, std::string_view code) {
  for (const auto& d : diags) {
    if (d.code == code) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("every corpus file parses without syntax errors") {
  for (const auto& path : testutil::corpus_files("parse_corpus", ".kql")) {
    auto result = parse(testutil::read_file(path));
    INFO(path.filename().string());
    for (const auto& d : result.diagnostics) INFO(d.code, ": ", d.message);
    CHECK(result.syntactically_correct());
  }
}

TEST_CASE("take pipeline structure") {
  auto result = parse("TableName | take 100");
  REQUIRE(result.syntactically_correct());
  REQUIRE(result.query.source != nullptr);
  CHECK(result.query.source->kind == TableExprKind::Table);
  CHECK(result.query.source->table == "TableName");
  REQUIRE(result.query.stages.size() == 1);
  CHECK(result.query.stages[0].kind == StageKind::Take);
  REQUIRE(result.query.stages[0].expr != nullptr);
  CHECK(result.query.stages[0].expr->literal_text == "100");
}

TEST_CASE("let binding precedes the pipeline") {
  auto result = parse("let Threshold = 100;\nT | where Value > Threshold");
  REQUIRE(result.syntactically_correct());
  REQUIRE(result.query.lets.size() == 1);
  CHECK(result.query.lets[0].name == "Threshold");
  REQUIRE(result.query.lets[0].value != nullptr);
  CHECK(result.query.lets[0].value->literal_text == "100");
  REQUIRE(result.query.stages.size() == 1);
  CHECK(result.query.stages[0].kind == StageKind::Where);
}

TEST_CASE("tabular let binding carries a subquery") {
  auto result = parse("let Recent = T | where Ts > ago(7d); Recent | count");
  REQUIRE(result.syntactically_correct());
  REQUIRE(result.query.lets.size() == 1);
  CHECK(result.query.lets[0].subquery != nullptr);
  CHECK(result.query.source->table == "Recent");
}

TEST_CASE("union source lists all tables") {
  auto result = parse("union T1, T2 | where Value > 50");
  REQUIRE(result.syntactically_correct());
  CHECK(result.query.source->kind == TableExprKind::Union);
  REQUIRE(result.query.source->union_tables.size() == 2);
  CHECK(result.query.source->union_tables[0] == "T1");
  CHECK(result.query.source->union_tables[1] == "T2");
}

TEST_CASE("range source captures bounds and step") {
  auto result = parse("range x from 1 to 10 step 1 | summarize sum(x)");
  REQUIRE(result.syntactically_correct());
  CHECK(result.query.source->kind == TableExprKind::Range);
  CHECK(result.query.source->range_var == "x");
  REQUIRE(result.query.stages.size() == 1);
  CHECK(result.query.stages[0].kind == StageKind::Summarize);
}

TEST_CASE("parenthesized pipeline inside extend becomes a subquery expression") {
  auto result = parse("T \n| extend NewValue = (subquery \n| summarize avg(Value))");
  REQUIRE(result.syntactically_correct());
  REQUIRE(result.query.stages.size() == 1);
  const auto& items = result.query.stages[0].items;
  REQUIRE(items.size() == 1);
  CHECK(items[0].name == "NewValue");
  REQUIRE(items[0].expr != nullptr);
  CHECK(items[0].expr->kind == ExprKind::Subquery);
  REQUIRE(items[0].expr->subquery != nullptr);
  CHECK(items[0].expr->subquery->source->table == "subquery");
}

TEST_CASE("join stage keeps kind, right side, and conditions") {
  auto result = parse(
      "TableA\n"
      "| extend JoinKey = tostring(parse_json(JsonColumn).JoinKey)\n"
      "| join kind=inner TableB on $left.JoinKey == $right.KeyColumn");
  REQUIRE(result.syntactically_correct());
  REQUIRE(result.query.stages.size() == 2);
  const auto& join = result.query.stages[1];
  CHECK(join.kind == StageKind::Join);
  CHECK(join.join_kind == "inner");
  REQUIRE(join.join_right != nullptr);
  CHECK(join.join_right->table == "TableB");
  REQUIRE(join.join_conditions.size() == 1);
  CHECK(join.join_conditions[0]->kind == ExprKind::Binary);
  CHECK(join.join_conditions[0]->name == "==");
}

TEST_CASE("case expression parses with a trailing default") {
  auto result = parse(
      "T \n| extend Status = case (\n    Value > 100, \"High\", \n"
      "    Value < 50, \"Low\", \n    \"Medium\"\n)");
  REQUIRE(result.syntactically_correct());
  const auto& item = result.query.stages[0].items[0];
  CHECK(item.expr->kind == ExprKind::Case);
  CHECK(item.expr->args.size() == 5);
}

TEST_CASE("property access chains bind to their root") {
  auto result = parse("T | where parse_json(Raw).user.name == 'x'");
  REQUIRE(result.syntactically_correct());
  const auto& cmp = result.query.stages[0].expr;
  REQUIRE(cmp->kind == ExprKind::Binary);
  const auto& lhs = cmp->args[0];
  CHECK(lhs->kind == ExprKind::PropertyAccess);
  CHECK(lhs->name == "name");
  CHECK(lhs->args[0]->kind == ExprKind::PropertyAccess);
  CHECK(lhs->args[0]->name == "user");
  CHECK(lhs->args[0]->args[0]->kind == ExprKind::FunctionCall);
}

TEST_CASE("between canonical form carries low and high") {
  auto result = parse("T | where Delta between (0m .. 5m)");
  REQUIRE(result.syntactically_correct());
  const auto& e = result.query.stages[0].expr;
  REQUIRE(e->kind == ExprKind::Between);
  REQUIRE(e->args.size() == 3);
  CHECK(e->args[1]->literal_text == "0m");
  CHECK(e->args[2]->literal_text == "5m");
}

TEST_CASE("between without parentheses is flagged but fully parsed") {
  auto result = parse("T | where Delta between 0 .. 5");
  CHECK(has_code(result.diagnostics, "between-missing-parens"));
  const auto& e = result.query.stages[0].expr;
  REQUIRE(e->kind == ExprKind::Between);
  REQUIRE(e->args.size() == 3);
}

TEST_CASE("bare assignment stage is preserved for repair") {
  auto result = parse("T | NewCol = Value * 2");
  CHECK(has_code(result.diagnostics, "bare-assignment-stage"));
  REQUIRE(result.query.stages.size() == 1);
  CHECK(result.query.stages[0].kind == StageKind::BareAssign);
  CHECK(result.query.stages[0].items[0].name == "NewCol");
}

TEST_CASE("dangling pipe is a syntax error") {
  auto result = parse("T | where A > 1 |");
  CHECK(has_code(result.diagnostics, "dangling-pipe"));
}

TEST_CASE("unknown stage keyword is reported and skipped") {
  auto result = parse("T | frobnicate A | take 5");
  CHECK(has_code(result.diagnostics, "unknown-operator"));
  // Recovery resumes at the next stage.
  REQUIRE(result.query.stages.size() == 2);
  CHECK(result.query.stages[1].kind == StageKind::Take);
}

TEST_CASE("unbalanced call is reported") {
  auto result = parse("T | where strlen(Name > 10");
  CHECK_FALSE(result.syntactically_correct());
  CHECK(has_code(result.diagnostics, "unbalanced-paren"));
}

TEST_CASE("empty input parses to an empty-query diagnostic") {
  auto result = parse("");
  CHECK(has_code(result.diagnostics, "empty-query"));
}

TEST_CASE("in and has operator family forms value lists") {
  auto result = parse(
      "T | where A in (1, 2, 3) and B has_any ('x', 'y') and C in~ ('u')");
  REQUIRE(result.syntactically_correct());
  const auto& expr = result.query.stages[0].expr;
  REQUIRE(expr->kind == ExprKind::Binary);
  CHECK(expr->name == "and");
}

TEST_CASE("matches regex is a single comparison operator") {
  auto result = parse("T | where Name matches regex 'a.*b'");
  REQUIRE(result.syntactically_correct());
  const auto& e = result.query.stages[0].expr;
  REQUIRE(e->kind == ExprKind::Binary);
  CHECK(e->name == "matches regex");
}

TEST_CASE("mv-apply parses a headless body") {
  auto result = parse(
      "T | mv-apply E = Entities to typeof(dynamic) on (where E.type == 'host' | count)");
  REQUIRE(result.syntactically_correct());
  const auto& stage = result.query.stages[0];
  CHECK(stage.kind == StageKind::MvApply);
  CHECK(stage.mv_name == "E");
  CHECK(stage.mv_typeof == "dynamic");
  REQUIRE(stage.mv_subquery != nullptr);
  CHECK(stage.mv_subquery->source == nullptr);
  CHECK(stage.mv_subquery->stages.size() == 2);
}

TEST_CASE("top and distinct and serialize stages parse") {
  auto result = parse(
      "T | serialize rn = row_number() | top 5 by Score desc | distinct A, B");
  REQUIRE(result.syntactically_correct());
  REQUIRE(result.query.stages.size() == 3);
  CHECK(result.query.stages[0].kind == StageKind::Serialize);
  CHECK(result.query.stages[1].kind == StageKind::Top);
  REQUIRE(result.query.stages[1].order_items.size() == 1);
  CHECK(result.query.stages[1].order_items[0].direction == SortDirection::Desc);
  CHECK(result.query.stages[2].kind == StageKind::Distinct);
}

TEST_CASE("operator precedence nests and above or") {
  auto result = parse("T | where A == 1 or B == 2 and C == 3");
  REQUIRE(result.syntactically_correct());
  const auto& e = result.query.stages[0].expr;
  CHECK(e->name == "or");
  CHECK(e->args[1]->name == "and");
}

TEST_CASE("arithmetic precedence nests multiplication above addition") {
  auto result = parse("T | extend X = A + B * C - D / 2");
  REQUIRE(result.syntactically_correct());
  const auto& e = result.query.stages[0].items[0].expr;
  CHECK(e->name == "-");
  CHECK(e->args[0]->name == "+");
  CHECK(e->args[0]->args[1]->name == "*");
  CHECK(e->args[1]->name == "/");
}
