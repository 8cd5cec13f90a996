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
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "nl2kql/catalog.hpp"
#include "nl2kql/embed.hpp"
#include "nl2kql/refine.hpp"
#include "test_util.hpp"

using namespace nl2kql;

namespace {

const catalog::DataCatalog& defender_catalog() {
  static const catalog::DataCatalog cat = catalog::load_catalog_file(
      (testutil::asset_dir() / "catalogs" / "defender.json").string());
  return cat;
}

const embed::VectorStore& defender_store() {
  static const embed::VectorStore store = [] {
    embed::DeterministicProvider provider;
    return catalog::build_catalog_store(defender_catalog(), provider);
  }();
  return store;
}

std::set<std::string> all_defender_tables() {
  std::set<std::string> names;
  for (const catalog::CatalogTable& table : defender_catalog().tables) {
    names.insert(table.name);
  }
  return names;
}

// Incident catalog with two enum columns, for value-candidate ranking.
catalog::DataCatalog incident_catalog() {
  catalog::DataCatalog cat;
  cat.database = "Toy";
  catalog::CatalogTable incidents;
  incidents.name = "Incidents";
  incidents.description = "Security incidents";
  incidents.columns.push_back({"Severity", "string", "", "Enum",
                               {{"High", ""}, {"Informational", ""},
                                {"Low", ""}, {"Medium", ""}}});
  incidents.columns.push_back(
      {"Status", "string", "", "Enum", {{"Active", ""}, {"Closed", ""}, {"New", ""}}});
  incidents.columns.push_back({"Title", "string", "", "", {}});
  incidents.columns.push_back({"Count", "long", "", "", {}});
  cat.tables.push_back(std::move(incidents));

  catalog::CatalogTable other;
  other.name = "Other";
  other.description = "Unrelated rows";
  other.columns.push_back(
      {"Kind", "string", "", "Enum", {{"A", ""}, {"B", ""}}});
  cat.tables.push_back(std::move(other));
  return cat;
}

std::vector<std::string> selected_names(const refine::RefinedSchema& refined) {
  std::vector<std::string> names;
  for (const catalog::CatalogTable* table : refined.tables) {
    names.push_back(table->name);
  }
  return names;
}

}  // namespace

TEST_CASE("schema refiner ranks accessible tables by question similarity") {
  embed::DeterministicProvider provider;

  SUBCASE("attachment question prefers the attachment table") {
    const refine::RefinedSchema refined = refine::refine_schema(
        "email attachment file name", defender_catalog(),
        {"EmailAttachmentInfo", "DeviceNetworkInfo"}, 9, 5, defender_store(),
        provider);
    REQUIRE(refined.tables.size() == 2);
    CHECK(refined.tables[0]->name == "EmailAttachmentInfo");
    CHECK(refined.tables[1]->name == "DeviceNetworkInfo");
  }
  SUBCASE("fewer accessible tables than t selects all of them") {
    const refine::RefinedSchema refined = refine::refine_schema(
        "anything at all", defender_catalog(),
        {"AlertInfo", "DeviceInfo", "EmailEvents"}, 9, 5, defender_store(),
        provider);
    CHECK(refined.tables.size() == 3);
  }
  SUBCASE("t bounds the selection") {
    const refine::RefinedSchema refined = refine::refine_schema(
        "device process events", defender_catalog(), all_defender_tables(), 2,
        5, defender_store(), provider);
    CHECK(refined.tables.size() == 2);
  }
  SUBCASE("selected tables keep every column") {
    const refine::RefinedSchema refined = refine::refine_schema(
        "machine operating system information", defender_catalog(),
        {"DeviceInfo"}, 9, 5, defender_store(), provider);
    REQUIRE(refined.tables.size() == 1);
    CHECK(refined.tables[0]->columns.size() == 37);
  }
  SUBCASE("question embedding is exposed for reuse") {
    const refine::RefinedSchema refined = refine::refine_schema(
        "email attachment file name", defender_catalog(), {"EmailAttachmentInfo"},
        9, 5, defender_store(), provider);
    CHECK(refined.nlq_embedding ==
          embed::embed_text(provider, "email attachment file name"));
  }
}

TEST_CASE("permission filter precedes ranking") {
  embed::DeterministicProvider provider;
  std::set<std::string> accessible = all_defender_tables();
  accessible.erase("EmailAttachmentInfo");

  const refine::RefinedSchema refined =
      refine::refine_schema("email attachment file name", defender_catalog(),
                            accessible, 9, 5, defender_store(), provider);
  CHECK(refined.tables.size() == 9);
  for (const catalog::CatalogTable* table : refined.tables) {
    CHECK(table->name != "EmailAttachmentInfo");
    CHECK(accessible.count(table->name) == 1);
  }
}

TEST_CASE("empty permission scope is an error") {
  embed::DeterministicProvider provider;
  CHECK_THROWS_WITH_AS(
      refine::refine_schema("anything", defender_catalog(), {}, 9, 5,
                            defender_store(), provider),
      doctest::Contains("permission scope"), refine::RefineError);
}

TEST_CASE("shrinking the accessible set never leaks excluded tables") {
  embed::DeterministicProvider provider;
  const std::set<std::string> universe = all_defender_tables();
  const std::vector<std::string> names(universe.begin(), universe.end());
  std::mt19937 rng(31);

  for (int trial = 0; trial < 50; ++trial) {
    std::set<std::string> accessible;
    for (const std::string& name : names) {
      if (rng() % 2 == 0) accessible.insert(name);
    }
    if (accessible.empty()) accessible.insert(names[rng() % names.size()]);

    const refine::RefinedSchema wide =
        refine::refine_schema("suspicious process activity", defender_catalog(),
                              accessible, 9, 5, defender_store(), provider);
    CHECK(wide.tables.size() <= 9);
    for (const catalog::CatalogTable* table : wide.tables) {
      CHECK(accessible.count(table->name) == 1);
    }

    std::set<std::string> narrowed = accessible;
    if (narrowed.size() > 1) {
      narrowed.erase(*std::next(narrowed.begin(), rng() % narrowed.size()));
    }
    const refine::RefinedSchema narrow =
        refine::refine_schema("suspicious process activity", defender_catalog(),
                              narrowed, 9, 5, defender_store(), provider);
    for (const catalog::CatalogTable* table : narrow.tables) {
      CHECK(narrowed.count(table->name) == 1);
    }
  }
}

TEST_CASE("enum values are ranked per column and capped at v_n") {
  embed::DeterministicProvider provider;
  const catalog::DataCatalog cat = incident_catalog();
  const embed::VectorStore store = catalog::build_catalog_store(cat, provider);

  SUBCASE("the matching value ranks first in its column") {
    const refine::RefinedSchema refined = refine::refine_schema(
        "high severity incidents", cat, {"Incidents"}, 9, 2, store, provider);
    REQUIRE(refined.tables.size() == 1);

    std::vector<std::string> severity_values;
    std::vector<std::string> status_values;
    for (const refine::CandidateValue& value : refined.candidate_values) {
      CHECK(value.table == "Incidents");
      if (value.column == "Severity") severity_values.push_back(value.value);
      if (value.column == "Status") status_values.push_back(value.value);
    }
    REQUIRE(severity_values.size() == 2);  // capped at v_n
    CHECK(severity_values[0] == "High");
    CHECK(status_values.size() == 2);
    CHECK(refined.candidate_values.size() == 4);  // no Title/Count candidates
  }
  SUBCASE("v_n of zero selects no values") {
    const refine::RefinedSchema refined = refine::refine_schema(
        "high severity incidents", cat, {"Incidents"}, 9, 0, store, provider);
    CHECK(refined.candidate_values.empty());
  }
  SUBCASE("values of unselected tables never appear") {
    const refine::RefinedSchema refined = refine::refine_schema(
        "kind of thing", cat, {"Incidents"}, 9, 5, store, provider);
    for (const refine::CandidateValue& value : refined.candidate_values) {
      CHECK(value.table != "Other");
    }
  }
  SUBCASE("scores are cosines against the question embedding") {
    const refine::RefinedSchema refined = refine::refine_schema(
        "high severity incidents", cat, {"Incidents"}, 9, 4, store, provider);
    for (const refine::CandidateValue& value : refined.candidate_values) {
      const embed::StoreEntry* entry = store.find(
          embed::value_key(value.table, value.column, value.value));
      REQUIRE(entry != nullptr);
      CHECK(value.score ==
            embed::cosine(refined.nlq_embedding, entry->vector));
    }
  }
}

TEST_CASE("refiner rejects a store that does not cover the catalog") {
  embed::DeterministicProvider provider;
  const catalog::DataCatalog cat = incident_catalog();

  // A store with the table entry but no value entries: the enum walk must
  // notice the hole instead of silently skipping values.
  embed::VectorStore partial(provider.dimension(), provider.id());
  partial.add(embed::table_key("Incidents"), embed::PayloadKind::Table,
              "Incidents", embed::deterministic_embed("Incidents"));
  CHECK_THROWS_WITH_AS(
      refine::refine_schema("high severity incidents", cat, {"Incidents"}, 9, 5,
                            partial, provider),
      doctest::Contains("missing the value entry"), refine::RefineError);

  // A store naming a table the catalog lacks.
  embed::VectorStore stale(provider.dimension(), provider.id());
  stale.add(embed::table_key("Ghost"), embed::PayloadKind::Table, "Ghost",
            embed::deterministic_embed("Ghost"));
  CHECK_THROWS_WITH_AS(
      refine::refine_schema("ghost", cat, {"Ghost"}, 9, 5, stale, provider),
      doctest::Contains("no table in the catalog"), refine::RefineError);
}

TEST_CASE("empty question propagates the embedding error") {
  embed::DeterministicProvider provider;
  CHECK_THROWS_AS(
      refine::refine_schema("", defender_catalog(), {"DeviceInfo"}, 9, 5,
                            defender_store(), provider),
      embed::EmbedError);
}
