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
#include "nl2kql/engine.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nl2kql/parser.hpp"

using namespace nl2kql;
using namespace nl2kql::engine;

namespace {

ResultTable run(const std::string& query_text, const Database& db) {
  kql::ParseResult parsed = kql::parse(query_text);
  REQUIRE_MESSAGE(parsed.diagnostics.empty(), query_text);
  return execute(parsed.query, db);
}

std::vector<std::string> ordered_signatures(const ResultTable& t) {
  std::vector<std::string> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    out.push_back(row_signature(t.columns, row));
  }
  return out;
}

CellValue cell_at(const ResultTable& t, std::size_t row,
                  const std::string& column) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (t.columns[i] == column) return t.rows.at(row).at(i);
  }
  FAIL("no column " << column);
  return CellValue::null();
}

Database small_db() {
  Database db;
  DataTable t;
  t.name = "T";
  t.columns = {{"K", "string"}, {"V", "long"}, {"X", "long"}};
  auto row = [](const char* k, std::int64_t v,
                std::optional<std::int64_t> x) {
    std::vector<CellValue> cells{CellValue::from_string(k),
                                 CellValue::from_long(v),
                                 x ? CellValue::from_long(*x)
                                   : CellValue::null()};
    return cells;
  };
  t.rows = {row("a", 1, 10), row("b", 2, std::nullopt), row("a", 3, 30),
            row("c", 4, 40), row("b", 5, 50)};
  db.tables["T"] = std::move(t);

  DataTable u;
  u.name = "U";
  u.columns = {{"K", "string"}, {"W", "long"}};
  u.rows = {{CellValue::from_string("a"), CellValue::from_long(100)},
            {CellValue::from_string("b"), CellValue::from_long(200)},
            {CellValue::from_string("a"), CellValue::from_long(300)}};
  db.tables["U"] = std::move(u);
  return db;
}

// Random tables for the oracle comparisons: a handful of key values so
// groups and join keys actually collide, plus occasional nulls.
DataTable random_table(std::mt19937& rng, const std::string& name,
                       std::size_t max_rows) {
  DataTable t;
  t.name = name;
  t.columns = {{"K", "string"}, {"V", "long"}};
  std::uniform_int_distribution<std::size_t> row_count(0, max_rows);
  std::uniform_int_distribution<int> key_pick(0, 5);
  std::uniform_int_distribution<std::int64_t> value_pick(-20, 20);
  static const char* kKeys[] = {"red", "green", "blue", "gold", "gray"};
  std::size_t rows = row_count(rng);
  for (std::size_t i = 0; i < rows; ++i) {
    int k = key_pick(rng);
    CellValue key = k == 5 ? CellValue::null() : CellValue::from_string(kKeys[k]);
    t.rows.push_back({std::move(key), CellValue::from_long(value_pick(rng))});
  }
  return t;
}

}  // namespace

TEST_CASE("where, project, and extend behave as a pipeline") {
  Database db = small_db();
  ResultTable r = run("T | where V > 2 | extend D = V * 2 | project K, D", db);
  CHECK(r.columns == std::vector<std::string>{"K", "D"});
  REQUIRE(r.rows.size() == 3);
  CHECK(cell_at(r, 0, "D").i == 6);
  CHECK(cell_at(r, 2, "D").i == 10);
}

TEST_CASE("take returns min(n, row count) rows") {
  Database db = small_db();
  for (std::int64_t n : {0, 2, 5, 7, 100}) {
    CAPTURE(n);
    ResultTable r = run("T | take " + std::to_string(n), db);
    CHECK(r.rows.size() == std::min<std::size_t>(static_cast<std::size_t>(n), 5));
  }
}

TEST_CASE("range 1..10 sums to 55") {
  Database db;
  ResultTable r = run("range x from 1 to 10 step 1 | summarize Total = sum(x)", db);
  REQUIRE(r.rows.size() == 1);
  CHECK(cell_at(r, 0, "Total").i == 55);
}

TEST_CASE("filters only ever drop rows") {
  std::mt19937 rng(20260814);
  Database db;
  db.tables["R"] = random_table(rng, "R", 50);
  ResultTable all = run("R", db);
  std::set<std::string> universe = row_signatures(all);

  static const char* kPredicates[] = {
      "V > %",       "V < %",        "V >= %",       "V != %",
      "V == %",      "K == \"red\"", "K has \"gr\"", "K contains \"l\"",
      "isnotnull(K)", "V between (% .. 10)",
  };
  std::uniform_int_distribution<std::int64_t> threshold(-25, 25);
  std::uniform_int_distribution<std::size_t> pick(0, std::size(kPredicates) - 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::string predicate = kPredicates[pick(rng)];
    std::size_t hole = predicate.find('%');
    if (hole != std::string::npos) {
      predicate.replace(hole, 1, std::to_string(threshold(rng)));
    }
    CAPTURE(predicate);
    ResultTable filtered = run("R | where " + predicate, db);
    CHECK(filtered.rows.size() <= all.rows.size());
    for (const auto& sig : row_signatures(filtered)) {
      CHECK(universe.count(sig) == 1);
    }
  }
}

TEST_CASE("summarize count matches a brute-force oracle on random tables") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    Database db;
    db.tables["R"] = random_table(rng, "R", 50);
    const DataTable& t = db.tables["R"];

    std::map<std::string, std::int64_t> oracle;
    for (const auto& row : t.rows) oracle[row[0].canonical_text()]++;

    ResultTable r = run("R | summarize Cnt = count() by K", db);
    CHECK(r.rows.size() == oracle.size());
    std::map<std::string, std::int64_t> got;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      got[cell_at(r, i, "K").canonical_text()] = cell_at(r, i, "Cnt").i;
    }
    CHECK(got == oracle);
  }
}

TEST_CASE("inner join matches a nested-loop oracle on random tables") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    Database db;
    db.tables["L"] = random_table(rng, "L", 20);
    db.tables["R"] = random_table(rng, "R", 20);
    const DataTable& lt = db.tables["L"];
    const DataTable& rt = db.tables["R"];

    // Nested loop; null keys never match; right columns renamed K1/V1.
    std::vector<std::string> columns = {"K", "V", "K1", "V1"};
    std::vector<std::string> oracle;
    for (const auto& lrow : lt.rows) {
      if (lrow[0].is_null()) continue;
      for (const auto& rrow : rt.rows) {
        if (rrow[0].is_null()) continue;
        if (lrow[0].s != rrow[0].s) continue;
        oracle.push_back(row_signature(
            columns, {lrow[0], lrow[1], rrow[0], rrow[1]}));
      }
    }

    ResultTable r = run("L | join kind=inner (R) on K", db);
    CHECK(r.columns == columns);
    CHECK(ordered_signatures(r) == oracle);
  }
}

TEST_CASE("execution is deterministic") {
  Database db = small_db();
  const char* query =
      "T | join kind=inner (U) on K | summarize Total = sum(W) by K"
      " | order by Total";
  ResultTable a = run(query, db);
  ResultTable b = run(query, db);
  CHECK(a.columns == b.columns);
  CHECK(ordered_signatures(a) == ordered_signatures(b));
}

TEST_CASE("order by defaults to descending and nulls sort as smallest") {
  Database db = small_db();
  ResultTable desc = run("T | order by X | project X", db);
  REQUIRE(desc.rows.size() == 5);
  CHECK(desc.rows[0][0].i == 50);
  CHECK(desc.rows[3][0].i == 10);
  CHECK(desc.rows[4][0].is_null());  // desc: nulls last

  ResultTable asc = run("T | order by X asc | project X", db);
  CHECK(asc.rows[0][0].is_null());  // asc: nulls first
  CHECK(asc.rows[1][0].i == 10);
  CHECK(asc.rows[4][0].i == 50);
}

TEST_CASE("sort is stable across equal keys") {
  Database db = small_db();
  ResultTable r = run("T | sort by K asc | project V", db);
  // Keys: a,b,a,c,b -> a(1),a(3),b(2),b(5),c(4) preserving input order.
  std::vector<std::int64_t> got;
  for (const auto& row : r.rows) got.push_back(row[0].i);
  CHECK(got == std::vector<std::int64_t>{1, 3, 2, 5, 4});
}

TEST_CASE("top sorts then truncates") {
  Database db = small_db();
  ResultTable r = run("T | top 2 by V", db);
  REQUIRE(r.rows.size() == 2);
  CHECK(cell_at(r, 0, "V").i == 5);
  CHECK(cell_at(r, 1, "V").i == 4);
}

TEST_CASE("distinct deduplicates and can project") {
  Database db = small_db();
  ResultTable named = run("T | distinct K", db);
  CHECK(named.columns == std::vector<std::string>{"K"});
  CHECK(named.rows.size() == 3);

  ResultTable star = run("T | distinct *", db);
  CHECK(star.rows.size() == 5);
}

TEST_CASE("extend with an existing name replaces the column in place") {
  Database db = small_db();
  ResultTable r = run("T | extend V = V * 10 | project V", db);
  CHECK(r.columns == std::vector<std::string>{"V"});
  CHECK(r.rows[0][0].i == 10);
}

TEST_CASE("project with duplicate output names fails") {
  Database db = small_db();
  kql::ParseResult parsed = kql::parse("T | project K, K");
  CHECK_THROWS_AS(execute(parsed.query, db), ExecutionError);
}

TEST_CASE("summarize over empty input") {
  Database db;
  DataTable empty;
  empty.name = "E";
  empty.columns = {{"K", "string"}, {"V", "long"}};
  db.tables["E"] = std::move(empty);

  ResultTable no_keys = run("E | summarize count()", db);
  REQUIRE(no_keys.rows.size() == 1);
  CHECK(no_keys.rows[0][0].i == 0);

  ResultTable keyed = run("E | summarize count() by K", db);
  CHECK(keyed.rows.empty());
}

TEST_CASE("aggregates compute sums, averages, extrema, and distinct counts") {
  Database db = small_db();
  ResultTable r = run(
      "T | summarize Total = sum(V), Mean = avg(V), Low = min(V),"
      " High = max(V), Kinds = dcount(K)",
      db);
  REQUIRE(r.rows.size() == 1);
  CHECK(cell_at(r, 0, "Total").i == 15);
  CHECK(cell_at(r, 0, "Mean").d == doctest::Approx(3.0));
  CHECK(cell_at(r, 0, "Low").i == 1);
  CHECK(cell_at(r, 0, "High").i == 5);
  CHECK(cell_at(r, 0, "Kinds").i == 3);
}

TEST_CASE("sum and avg skip nulls and return null for empty groups") {
  Database db = small_db();
  ResultTable r = run("T | where V > 100 | summarize S = sum(V)", db);
  REQUIRE(r.rows.size() == 1);
  CHECK(cell_at(r, 0, "S").is_null());

  ResultTable skipped = run("T | summarize S = sum(X)", db);
  CHECK(cell_at(skipped, 0, "S").i == 130);  // null X rows ignored
}

TEST_CASE("arg_max returns the companion column of the extreme row") {
  Database db = small_db();
  ResultTable r = run("T | summarize Best = arg_max(V, K)", db);
  CHECK(cell_at(r, 0, "Best").s == "b");
}

TEST_CASE("aggregate expressions compose with scalar arithmetic") {
  Database db = small_db();
  ResultTable r = run("T | summarize Spread = max(V) - min(V) by K", db);
  std::map<std::string, std::int64_t> got;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    got[cell_at(r, i, "K").s] = cell_at(r, i, "Spread").i;
  }
  CHECK(got == std::map<std::string, std::int64_t>{
                   {"a", 2}, {"b", 3}, {"c", 0}});
}

TEST_CASE("count stage emits a single Count column") {
  Database db = small_db();
  ResultTable r = run("T | where K == \"a\" | count", db);
  CHECK(r.columns == std::vector<std::string>{"Count"});
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0][0].i == 2);
}

TEST_CASE("union aligns columns by name and pads with nulls") {
  Database db = small_db();
  ResultTable r = run("union T, U | where isnotnull(W) | project K, V, W", db);
  REQUIRE(r.rows.size() == 3);
  CHECK(cell_at(r, 0, "V").is_null());
  CHECK(cell_at(r, 0, "W").i == 100);
}

TEST_CASE("let bindings supply scalars and tabular views") {
  Database db = small_db();
  ResultTable r = run(
      "let cutoff = 2;\n"
      "let big = T | where V > cutoff;\n"
      "big | count",
      db);
  CHECK(r.rows[0][0].i == 3);
}

TEST_CASE("join defaults to innerunique which dedupes the left side") {
  Database db = small_db();
  // T has two "a" and two "b" rows; innerunique keeps the first of each,
  // so only a(1) and b(2) reach the match phase.
  ResultTable dflt = run("T | join (U) on K", db);
  ResultTable inner = run("T | join kind=inner (U) on K", db);
  CHECK(dflt.rows.size() == 3);   // a(1)x{100,300} + b(2)x{200}
  CHECK(inner.rows.size() == 6);  // (2 left a)x(2 right a) + (2 left b)x1
}

TEST_CASE("leftouter pads unmatched rows; semi and anti filter") {
  Database db = small_db();
  ResultTable outer = run("T | join kind=leftouter (U) on K", db);
  CHECK(outer.rows.size() == 7);  // 6 matches + unmatched "c"

  ResultTable semi = run("T | join kind=leftsemi (U) on K", db);
  CHECK(semi.columns == std::vector<std::string>{"K", "V", "X"});
  CHECK(semi.rows.size() == 4);

  ResultTable anti = run("T | join kind=leftanti (U) on K", db);
  CHECK(anti.rows.size() == 1);
  CHECK(cell_at(anti, 0, "K").s == "c");

  ResultTable antisemi = run("T | join kind=leftantisemi (U) on K", db);
  CHECK(ordered_signatures(antisemi) == ordered_signatures(anti));

  ResultTable rsemi = run("T | join kind=rightsemi (U) on K", db);
  CHECK(rsemi.columns == std::vector<std::string>{"K", "W"});
  CHECK(rsemi.rows.size() == 3);

  ResultTable ranti = run("T | join kind=rightanti (U) on K", db);
  CHECK(ranti.rows.empty());
}

TEST_CASE("null join keys never match") {
  Database db;
  DataTable l;
  l.name = "L";
  l.columns = {{"K", "string"}};
  l.rows = {{CellValue::null()}, {CellValue::from_string("x")}};
  db.tables["L"] = std::move(l);
  DataTable r;
  r.name = "R";
  r.columns = {{"K", "string"}};
  r.rows = {{CellValue::null()}, {CellValue::from_string("x")}};
  db.tables["R"] = std::move(r);

  ResultTable joined = run("L | join kind=inner (R) on K", db);
  CHECK(joined.rows.size() == 1);

  ResultTable anti = run("L | join kind=leftanti (R) on K", db);
  CHECK(anti.rows.size() == 1);  // the null-key row never matches
  CHECK(anti.rows[0][0].is_null());
}

TEST_CASE("explicit $left/$right join conditions map distinct names") {
  Database db = small_db();
  ResultTable r = run("T | join kind=inner (U) on $left.K == $right.K", db);
  CHECK(r.rows.size() == 6);
}

TEST_CASE("unsupported join kinds raise instead of guessing") {
  Database db = small_db();
  for (const char* kind : {"rightouter", "fullouter"}) {
    CAPTURE(kind);
    kql::ParseResult parsed =
        kql::parse(std::string("T | join kind=") + kind + " (U) on K");
    REQUIRE(parsed.diagnostics.empty());
    CHECK_THROWS_AS(execute(parsed.query, db), ExecutionError);
  }
}

TEST_CASE("mv-expand explodes arrays and drops empty rows") {
  Database db;
  DataTable t;
  t.name = "T";
  t.columns = {{"Id", "long"}, {"Tags", "dynamic"}};
  std::string err;
  t.rows = {
      {CellValue::from_long(1), parse_cell("[\"a\",\"b\"]", true, "dynamic", err)},
      {CellValue::from_long(2), parse_cell("[]", true, "dynamic", err)},
      {CellValue::from_long(3), CellValue::null()},
  };
  REQUIRE(err.empty());
  db.tables["T"] = std::move(t);

  ResultTable r = run("T | mv-expand Tags", db);
  REQUIRE(r.rows.size() == 2);
  CHECK(cell_at(r, 0, "Tags").s == "a");
  CHECK(cell_at(r, 1, "Tags").s == "b");

  ResultTable typed = run("T | mv-expand Tag = Tags to typeof(string)", db);
  CHECK(typed.columns == std::vector<std::string>{"Id", "Tags", "Tag"});
  CHECK(cell_at(typed, 0, "Tag").s == "a");
}

TEST_CASE("parse_json enables property access in predicates") {
  Database db;
  DataTable t;
  t.name = "T";
  t.columns = {{"Raw", "string"}};
  t.rows = {{CellValue::from_string("{\"user\":{\"name\":\"kim\"},\"n\":3}")}};
  db.tables["T"] = std::move(t);

  ResultTable r = run(
      "T | extend P = parse_json(Raw)"
      " | where P.user.name == \"kim\" and P.n > 1"
      " | project Name = P.user.name",
      db);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0][0].s == "kim");
}

TEST_CASE("scalar function behaviors") {
  Database db = small_db();
  SUBCASE("string helpers") {
    ResultTable r = run(
        "T | take 1 | project A = strcat(K, \"-\", tostring(V)),"
        " B = toupper(K), C = strlen(\"hello\"), D = substring(\"abcdef\", 2, 3),"
        " E = replace_string(\"a-b-c\", \"-\", \"+\")",
        db);
    CHECK(cell_at(r, 0, "A").s == "a-1");
    CHECK(cell_at(r, 0, "B").s == "A");
    CHECK(cell_at(r, 0, "C").i == 5);
    CHECK(cell_at(r, 0, "D").s == "cde");
    CHECK(cell_at(r, 0, "E").s == "a+b+c");
  }
  SUBCASE("conditionals") {
    ResultTable r = run(
        "T | project L = iff(V > 2, \"big\", \"small\"),"
        " C = case(V == 1, \"one\", V == 2, \"two\", \"many\")",
        db);
    CHECK(cell_at(r, 0, "L").s == "small");
    CHECK(cell_at(r, 0, "C").s == "one");
    CHECK(cell_at(r, 4, "L").s == "big");
    CHECK(cell_at(r, 4, "C").s == "many");
  }
  SUBCASE("numeric conversions and binning") {
    ResultTable r = run(
        "T | take 1 | project A = bin(17, 5), B = toint(\"12\"),"
        " C = todouble(\"2.5\"), D = tolong(3.9)",
        db);
    CHECK(cell_at(r, 0, "A").i == 15);
    CHECK(cell_at(r, 0, "B").i == 12);
    CHECK(cell_at(r, 0, "C").d == doctest::Approx(2.5));
    CHECK(cell_at(r, 0, "D").i == 3);
  }
  SUBCASE("split produces a dynamic array") {
    ResultTable r = run(
        "T | take 1 | project N = array_length(split(\"a,b,c\", \",\"))", db);
    CHECK(cell_at(r, 0, "N").i == 3);
  }
}

TEST_CASE("long division truncates and string plus concatenates") {
  Database db = small_db();
  ResultTable r = run(
      "T | take 1 | project Q = 7 / 2, R = 7.0 / 2, S = \"a\" + \"b\"", db);
  CHECK(cell_at(r, 0, "Q").i == 3);
  CHECK(cell_at(r, 0, "R").d == doctest::Approx(3.5));
  CHECK(cell_at(r, 0, "S").s == "ab");
}

TEST_CASE("datetime and timespan arithmetic") {
  Database db;
  DataTable t;
  t.name = "T";
  t.columns = {{"Ts", "datetime"}};
  t.rows = {{CellValue::datetime(*parse_datetime_micros("2024-01-10"))}};
  db.tables["T"] = std::move(t);

  ResultTable r = run(
      "T | where Ts > datetime(2024-01-01) and Ts < datetime(2024-01-01) + 30d"
      " | project Next = Ts + 1d, Gap = Ts - datetime(2024-01-09)",
      db);
  REQUIRE(r.rows.size() == 1);
  CHECK(format_datetime_micros(cell_at(r, 0, "Next").i) ==
        "2024-01-11T00:00:00.000000Z");
  CHECK(cell_at(r, 0, "Gap").type == CellValue::Type::Timespan);
  CHECK(cell_at(r, 0, "Gap").i == 86400000000LL);
}

TEST_CASE("now and ago are pinned to the database clock") {
  Database db = small_db();
  db.now_micros = *parse_datetime_micros("2024-06-15 12:00:00");
  ResultTable r = run("T | take 1 | project A = now(), B = ago(1d)", db);
  CHECK(format_datetime_micros(cell_at(r, 0, "A").i) ==
        "2024-06-15T12:00:00.000000Z");
  CHECK(format_datetime_micros(cell_at(r, 0, "B").i) ==
        "2024-06-14T12:00:00.000000Z");
}

TEST_CASE("comparisons against null are false, not null-propagating errors") {
  Database db = small_db();
  // X is null on one row; neither X > 0 nor X <= 0 admits it.
  ResultTable above = run("T | where X > 0", db);
  ResultTable below = run("T | where X <= 0", db);
  CHECK(above.rows.size() + below.rows.size() == 4);
  ResultTable eq = run("T | where X == X", db);
  CHECK(eq.rows.size() == 4);  // null == null is false
}

TEST_CASE("between is inclusive on both ends") {
  Database db = small_db();
  ResultTable r = run("T | where V between (2 .. 4) | project V", db);
  std::vector<std::int64_t> got;
  for (const auto& row : r.rows) got.push_back(row[0].i);
  CHECK(got == std::vector<std::int64_t>{2, 3, 4});
}

TEST_CASE("text operators: in, in~, has, has_any, contains, matches regex") {
  Database db = small_db();
  CHECK(run("T | where K in (\"a\", \"c\")", db).rows.size() == 3);
  CHECK(run("T | where K in~ (\"A\")", db).rows.size() == 2);
  CHECK(run("T | where K has \"a\"", db).rows.size() == 2);
  CHECK(run("T | where K has_any (\"a\", \"b\")", db).rows.size() == 4);
  CHECK(run("T | where K contains \"a\"", db).rows.size() == 2);
  CHECK(run("T | where K matches regex \"^[ab]$\"", db).rows.size() == 4);
}

TEST_CASE("has respects word boundaries while contains does not") {
  Database db;
  DataTable t;
  t.name = "T";
  t.columns = {{"S", "string"}};
  t.rows = {{CellValue::from_string("Windows Defender")},
            {CellValue::from_string("WindowsDefender")}};
  db.tables["T"] = std::move(t);
  CHECK(run("T | where S has \"Windows\"", db).rows.size() == 1);
  CHECK(run("T | where S contains \"Windows\"", db).rows.size() == 2);
}

TEST_CASE("row_number requires a serialized input") {
  Database db = small_db();
  kql::ParseResult parsed = kql::parse("T | extend N = row_number()");
  REQUIRE(parsed.diagnostics.empty());
  CHECK_THROWS_AS(execute(parsed.query, db), ExecutionError);

  ResultTable r = run("T | serialize | extend N = row_number() | take 3", db);
  CHECK(cell_at(r, 0, "N").i == 1);
  CHECK(cell_at(r, 2, "N").i == 3);

  ResultTable ordered = run("T | order by V asc | extend N = row_number()", db);
  CHECK(cell_at(ordered, 0, "N").i == 1);
}

TEST_CASE("render passes data through untouched") {
  Database db = small_db();
  ResultTable plain = run("T | summarize count() by K", db);
  ResultTable rendered = run("T | summarize count() by K | render barchart", db);
  CHECK(ordered_signatures(plain) == ordered_signatures(rendered));
}

TEST_CASE("unsupported constructs raise ExecutionError rather than guessing") {
  Database db = small_db();
  for (const char* query : {
           "T | extend N = next(V)",
           "T | extend N = prev(V)",
           "T | extend N = no_such_function(V)",
           "T | mv-apply X on (where V > 1)",
           "NoSuchTable | take 1",
       }) {
    CAPTURE(query);
    kql::ParseResult parsed = kql::parse(query);
    REQUIRE(parsed.diagnostics.empty());
    CHECK_THROWS_AS(execute(parsed.query, db), ExecutionError);
  }
}

TEST_CASE("subqueries work as sources and as scalar expressions") {
  Database db = small_db();
  ResultTable src = run("(T | where V > 3) | count", db);
  CHECK(src.rows[0][0].i == 2);

  ResultTable scalar = run("T | where V > (T | summarize avg(V))", db);
  CHECK(scalar.rows.size() == 2);
}

TEST_CASE("row signatures are independent of column order") {
  ResultTable a;
  a.columns = {"X", "Y"};
  a.rows = {{CellValue::from_long(1), CellValue::from_string("s")}};
  ResultTable b;
  b.columns = {"Y", "X"};
  b.rows = {{CellValue::from_string("s"), CellValue::from_long(1)}};
  CHECK(row_signatures(a) == row_signatures(b));
  CHECK(result_columns(a) == result_columns(b));
}

TEST_CASE("row signatures distinguish values and column names") {
  std::vector<std::string> cols = {"A"};
  CHECK(row_signature(cols, {CellValue::from_long(1)}) !=
        row_signature(cols, {CellValue::from_string("1")}));
  CHECK(row_signature({"A"}, {CellValue::from_long(1)}) !=
        row_signature({"B"}, {CellValue::from_long(1)}));
}

TEST_CASE("integral doubles and longs share canonical group keys") {
  CHECK(CellValue::from_double(2.0).canonical_text() ==
        CellValue::from_long(2).canonical_text());
  CHECK(CellValue::from_double(2.5).canonical_text() == "num:2.5");
}
