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

#include <string>

#include "doctest.h"
#include "nl2kql/parser.hpp"
#include "test_util.hpp"

using namespace nl2kql::kql;

TEST_CASE("canonical form puts one stage per line") {
  auto result = parse("TableName | take 100");
  REQUIRE(result.syntactically_correct());
  CHECK(render(result.query) == "TableName\n| take 100");
}

TEST_CASE("canonical form normalizes spacing") {
  auto result = parse("T|where A>1");
  REQUIRE(result.syntactically_correct());
  CHECK(render(result.query) == "T\n| where A > 1");
}

TEST_CASE("lets render on their own lines") {
  auto result = parse("let Threshold = 100;\nT | where Value > Threshold");
  REQUIRE(result.syntactically_correct());
  CHECK(render(result.query) ==
        "let Threshold = 100;\nT\n| where Value > Threshold");
}

TEST_CASE("join renders kind, right side, and conditions on one line") {
  auto result = parse(
      "T | join kind=leftouter (U | where A > 1) on $left.K == $right.K");
  REQUIRE(result.syntactically_correct());
  CHECK(render(result.query) ==
        "T\n| join kind=leftouter (U | where A > 1) on $left.K == $right.K");
}

TEST_CASE("render round-trips structurally on the corpus") {
  for (const auto& path : testutil::corpus_files("parse_corpus", ".kql")) {
    auto first = parse(testutil::read_file(path));
    INFO(path.filename().string());
    REQUIRE(first.syntactically_correct());
    std::string printed = render(first.query);
    auto second = parse(printed);
    INFO(printed);
    for (const auto& d : second.diagnostics) INFO(d.code, ": ", d.message);
    REQUIRE(second.syntactically_correct());
    CHECK(structurally_equal(first.query, second.query));
    // A canonical render is a fixed point.
    CHECK(render(second.query) == printed);
  }
}

TEST_CASE("render round-trips tricky expressions") {
  const char* inputs[] = {
      "T | where (A or B) and C",
      "T | where A - (B - C) > 0",
      "T | extend X = -(A + B) * 2",
      "T | where A between (ago(7d) .. now())",
      "T | where A in (1, 2) or B has_all ('x', 'y')",
      "T | project ['odd name'], B = A + 1",
      "T | summarize avg(X) by bin(Ts, 1h)",
      "T | mv-expand E = Items to typeof(string)",
      "T | where X == (U | summarize max(V))",
      "range x from 1 to 10 step 1 | summarize sum(x)",
      "T | where Name matches regex 'a+' | count",
      "T | serialize | extend rn = row_number()",
  };
  for (const char* input : inputs) {
    auto first = parse(input);
    INFO(input);
    for (const auto& d : first.diagnostics) INFO(d.code, ": ", d.message);
    REQUIRE(first.syntactically_correct());
    auto second = parse(render(first.query));
    INFO(render(first.query));
    REQUIRE(second.syntactically_correct());
    CHECK(structurally_equal(first.query, second.query));
  }
}

TEST_CASE("between always renders parenthesized") {
  auto flagged = parse("T | where Delta between 0 .. 5");
  CHECK_FALSE(flagged.syntactically_correct());
  CHECK(render(flagged.query) == "T\n| where Delta between (0 .. 5)");
}

TEST_CASE("quoted identifiers round-trip through rendering") {
  auto result = parse("T | project ['Column Name']");
  REQUIRE(result.syntactically_correct());
  CHECK(render(result.query) == "T\n| project ['Column Name']");
}

TEST_CASE("structural equality ignores formatting only") {
  auto a = parse("T | where A > 1 and B < 2");
  auto b = parse("T\n|   where A > 1 and B < 2 // comment");
  auto c = parse("T | where A > 1 or B < 2");
  CHECK(structurally_equal(a.query, b.query));
  CHECK_FALSE(structurally_equal(a.query, c.query));
}
