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
#include "nl2kql/datatable.hpp"

#include <doctest.h>

#include <fstream>

#include "test_util.hpp"

using namespace nl2kql;
using namespace nl2kql::engine;

namespace {

const char* kEventsData =
    "Events\n"
    "Name:string,Count:long,Score:real,Active:bool,Seen:datetime,Window:timespan,Payload:dynamic\n"
    "\"alpha\",\"3\",\"1.5\",\"true\",\"2024-01-15 08:30:00\",\"7d\",\"{\"\"k\"\":1}\"\n"
    "\"beta\",\"-2\",\"0.25\",\"false\",\"2024-02-01\",\"30m\",\"[1,2,3]\"\n"
    ",,,,,,\n";

}  // namespace

TEST_CASE("parse_table_data decodes every column type") {
  DataTable t = parse_table_data(kEventsData, "events.tbl");
  CHECK(t.name == "Events");
  REQUIRE(t.columns.size() == 7);
  CHECK(t.columns[0].name == "Name");
  CHECK(t.columns[0].type == "string");
  CHECK(t.columns[6].type == "dynamic");
  REQUIRE(t.rows.size() == 3);

  const auto& r0 = t.rows[0];
  CHECK(r0[0].type == CellValue::Type::String);
  CHECK(r0[0].s == "alpha");
  CHECK(r0[1].i == 3);
  CHECK(r0[2].d == doctest::Approx(1.5));
  CHECK(r0[3].b == true);
  CHECK(r0[4].type == CellValue::Type::DateTime);
  CHECK(format_datetime_micros(r0[4].i) == "2024-01-15T08:30:00.000000Z");
  CHECK(r0[5].type == CellValue::Type::Timespan);
  CHECK(r0[5].i == 7LL * 24 * 3600 * 1000000);
  REQUIRE(r0[6].type == CellValue::Type::Dynamic);
  CHECK(r0[6].dyn->canonical_text() == "{\"k\":1}");

  // Unquoted empty cells are nulls.
  for (const auto& cell : t.rows[2]) CHECK(cell.is_null());
}

TEST_CASE("quoted empty cell is an empty string, not null") {
  DataTable t = parse_table_data("T\nA:string,B:string\n\"\",\n", "t.tbl");
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0].type == CellValue::Type::String);
  CHECK(t.rows[0][0].s.empty());
  CHECK(t.rows[0][1].is_null());
}

TEST_CASE("doubled quotes inside a quoted cell decode to one quote") {
  DataTable t = parse_table_data("T\nA:string\n\"say \"\"hi\"\"\"\n", "t.tbl");
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0].s == "say \"hi\"");
}

TEST_CASE("loader reports typed errors with origin and line") {
  std::string error;

  SUBCASE("unknown column type") {
    CHECK_THROWS_WITH_AS(parse_table_data("T\nA:str\n", "bad.tbl"),
                         doctest::Contains("bad.tbl"), LoadError);
  }
  SUBCASE("wrong cell count") {
    CHECK_THROWS_AS(parse_table_data("T\nA:long,B:long\n\"1\"\n", "bad.tbl"),
                    LoadError);
  }
  SUBCASE("non-numeric long cell") {
    CHECK_THROWS_WITH_AS(
        parse_table_data("T\nA:long\n\"xyz\"\n", "bad.tbl"),
        doctest::Contains("column 'A'"), LoadError);
  }
  SUBCASE("malformed dynamic json") {
    CHECK_THROWS_AS(parse_table_data("T\nA:dynamic\n\"{oops\"\n", "bad.tbl"),
                    LoadError);
  }
  SUBCASE("duplicate column name") {
    CHECK_THROWS_AS(parse_table_data("T\nA:long,A:long\n", "bad.tbl"),
                    LoadError);
  }
  SUBCASE("missing header") {
    CHECK_THROWS_AS(parse_table_data("T\n", "bad.tbl"), LoadError);
  }
}

TEST_CASE("load_database reads files and rejects duplicate tables") {
  std::string dir = (testutil::test_data_dir() / "tmp_db").string();
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir + "/one.tbl");
    f << "One\nA:long\n\"1\"\n";
  }
  {
    std::ofstream f(dir + "/two.tbl");
    f << "Two\nB:string\n\"x\"\n";
  }
  Database db = load_database({dir + "/one.tbl", dir + "/two.tbl"});
  CHECK(db.tables.size() == 2);
  CHECK(db.find("One") != nullptr);
  CHECK(db.find("Missing") == nullptr);

  {
    std::ofstream f(dir + "/dup.tbl");
    f << "One\nC:long\n";
  }
  CHECK_THROWS_AS(
      load_database({dir + "/one.tbl", dir + "/dup.tbl"}), LoadError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("format_cell and parse_cell round-trip every type") {
  std::vector<std::pair<CellValue, std::string>> cases = {
      {CellValue::from_string("a\"b"), "string"},
      {CellValue::from_long(-42), "long"},
      {CellValue::from_double(2.5), "real"},
      {CellValue::from_bool(true), "bool"},
      {CellValue::datetime(1705307400000000LL), "datetime"},
      {CellValue::timespan(90 * 60 * 1000000LL), "timespan"},
  };
  for (const auto& [cell, type] : cases) {
    CAPTURE(type);
    // format_cell emits quoted-CSV text; decode it through the table parser.
    std::string table_text = "T\nA:" + type + "\n" + format_cell(cell) + "\n";
    DataTable t = parse_table_data(table_text, "roundtrip.tbl");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][0].canonical_text() == cell.canonical_text());
  }
  // Null formats as the unquoted empty cell.
  CHECK(format_cell(CellValue::null()).empty());
}

TEST_CASE("database schema exposes loaded tables as accessible") {
  Database db;
  DataTable t;
  t.name = "T";
  t.columns = {{"A", "long"}, {"B", "string"}};
  db.tables["T"] = t;
  Schema schema = db.to_schema();
  REQUIRE(schema.tables.size() == 1);
  CHECK(schema.tables[0].name == "T");
  CHECK(schema.tables[0].accessible);
  REQUIRE(schema.tables[0].columns.size() == 2);
  CHECK(schema.tables[0].columns[1].name == "B");
}

TEST_CASE("carriage returns in table data are tolerated") {
  DataTable t = parse_table_data("T\r\nA:long\r\n\"7\"\r\n", "t.tbl");
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0].i == 7);
}
