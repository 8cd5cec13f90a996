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
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "nl2kql/catalog.hpp"
#include "nl2kql/embed.hpp"
#include "nl2kql/fewshot.hpp"
#include "test_util.hpp"

using namespace nl2kql;

namespace {

const catalog::DataCatalog& defender_catalog() {
  static const catalog::DataCatalog cat = catalog::load_catalog_file(
      (testutil::asset_dir() / "catalogs" / "defender.json").string());
  return cat;
}

const fewshot::FewShotDb& defender_fsdb() {
  static const fewshot::FewShotDb db = [] {
    embed::DeterministicProvider provider;
    return fewshot::load_fsdb_file(
        (testutil::asset_dir() / "fewshots" / "defender.jsonl").string(),
        defender_catalog(), provider);
  }();
  return db;
}

double norm_of(const embed::Vector& v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

fewshot::FewShot shot_with(std::string nlq, embed::Vector e,
                           std::set<std::string> tables = {}) {
  fewshot::FewShot shot;
  shot.nlq = std::move(nlq);
  shot.kql = "T | take 1";
  shot.nlq_embedding = std::move(e);
  shot.referenced_tables = std::move(tables);
  return shot;
}

std::vector<const fewshot::FewShot*> as_candidates(const fewshot::FewShotDb& db) {
  std::vector<const fewshot::FewShot*> out;
  for (const fewshot::FewShot& shot : db.shots) out.push_back(&shot);
  return out;
}

// Fails the test if consulted: guards the zero-shot fast path.
class ThrowingProvider : public embed::EmbeddingProvider {
 public:
  std::size_t dimension() const override { return 4; }
  std::string id() const override { return "throwing"; }
  std::vector<embed::Vector> embed_batch(
      const std::vector<std::string>&) override {
    throw embed::EmbedError("provider must not be called");
  }
};

}  // namespace

TEST_CASE("bundled few-shot databases load and validate") {
  embed::DeterministicProvider provider;

  SUBCASE("defender shots") {
    const fewshot::FewShotDb& db = defender_fsdb();
    CHECK(db.database == defender_catalog().database);
    CHECK(db.shots.size() == 16);
    bool has_join_shot = false;
    for (const fewshot::FewShot& shot : db.shots) {
      CHECK(!shot.nlq.empty());
      CHECK(!shot.kql.empty());
      CHECK(shot.nlq_embedding.size() == provider.dimension());
      CHECK(norm_of(shot.nlq_embedding) == doctest::Approx(1.0));
      CHECK(!shot.referenced_tables.empty());
      if (shot.referenced_tables ==
          std::set<std::string>{"AlertEvidence", "AlertInfo"}) {
        has_join_shot = true;
      }
    }
    CHECK(has_join_shot);
  }
  SUBCASE("sentinel shots") {
    const catalog::DataCatalog cat = catalog::load_catalog_file(
        (testutil::asset_dir() / "catalogs" / "sentinel.json").string());
    const fewshot::FewShotDb db = fewshot::load_fsdb_file(
        (testutil::asset_dir() / "fewshots" / "sentinel.jsonl").string(), cat,
        provider);
    CHECK(db.shots.size() == 19);
  }
}

TEST_CASE("loading aborts listing every invalid shot") {
  embed::DeterministicProvider provider;
  const std::string jsonl =
      "{\"nlq\": \"recent devices\", \"kql\": \"DeviceInfo | take 5\"}\n"
      "{not json}\n"
      "{\"nlq\": \"dangling\", \"kql\": \"DeviceInfo |\"}\n"
      "{\"nlq\": \"ghost\", \"kql\": \"NoSuchTable | take 5\"}\n"
      "{\"nlq\": \"   \", \"kql\": \"DeviceInfo | take 5\"}\n"
      "{\"nlq\": \"missing query\"}\n";
  try {
    fewshot::load_fsdb(jsonl, "bad.jsonl", defender_catalog(), provider);
    FAIL("load_fsdb accepted invalid shots");
  } catch (const fewshot::FewshotError& e) {
    const std::string message = e.what();
    CHECK(message.find("bad.jsonl: 5 invalid shot(s)") != std::string::npos);
    CHECK(message.find("line 2: invalid JSON") != std::string::npos);
    CHECK(message.find("line 3: syntax:") != std::string::npos);
    CHECK(message.find("line 4: semantic:") != std::string::npos);
    CHECK(message.find("line 5: nlq is empty") != std::string::npos);
    CHECK(message.find("line 6: record must be an object with string nlq and "
                       "kql") != std::string::npos);
  }
}

TEST_CASE("loading skips blank lines and trims fields") {
  embed::DeterministicProvider provider;
  const std::string jsonl =
      "\n"
      "{\"nlq\": \"  recent devices  \", \"kql\": \"  DeviceInfo | take 5  \"}\n"
      "   \n"
      "{\"nlq\": \"alerts\", \"kql\": \"AlertInfo | take 3\"}\n"
      "\n";
  const fewshot::FewShotDb db =
      fewshot::load_fsdb(jsonl, "inline", defender_catalog(), provider);
  REQUIRE(db.shots.size() == 2);
  CHECK(db.shots[0].nlq == "recent devices");
  CHECK(db.shots[0].kql == "DeviceInfo | take 5");
  CHECK(db.shots[0].referenced_tables == std::set<std::string>{"DeviceInfo"});
  CHECK(db.shots[1].referenced_tables == std::set<std::string>{"AlertInfo"});
}

TEST_CASE("missing few-shot file is an error") {
  embed::DeterministicProvider provider;
  CHECK_THROWS_WITH_AS(
      fewshot::load_fsdb_file("/nonexistent/shots.jsonl", defender_catalog(),
                              provider),
      doctest::Contains("cannot read few-shot file"), fewshot::FewshotError);
}

TEST_CASE("schema-relevant filter keeps shots whose tables are accessible") {
  fewshot::FewShotDb db;
  db.shots.push_back(shot_with("a", {1, 0, 0, 0}, {"A"}));
  db.shots.push_back(shot_with("ab", {0, 1, 0, 0}, {"A", "B"}));
  db.shots.push_back(shot_with("c", {0, 0, 1, 0}, {"C"}));
  db.shots.push_back(shot_with("b", {0, 0, 0, 1}, {"B"}));

  SUBCASE("subset retention preserves database order") {
    const auto relevant = fewshot::filter_schema_relevant(db, {"A", "B"});
    REQUIRE(relevant.size() == 3);
    CHECK(relevant[0] == &db.shots[0]);
    CHECK(relevant[1] == &db.shots[1]);
    CHECK(relevant[2] == &db.shots[3]);
  }
  SUBCASE("full access keeps everything") {
    CHECK(fewshot::filter_schema_relevant(db, {"A", "B", "C"}).size() == 4);
  }
  SUBCASE("a shot needing any inaccessible table is dropped") {
    const auto relevant = fewshot::filter_schema_relevant(db, {"A", "C"});
    REQUIRE(relevant.size() == 2);
    CHECK(relevant[0] == &db.shots[0]);
    CHECK(relevant[1] == &db.shots[2]);
  }
  SUBCASE("no access drops every shot") {
    CHECK(fewshot::filter_schema_relevant(db, {}).empty());
  }
}

TEST_CASE("few-shot selection ranks candidates by cosine similarity") {
  fewshot::FewShotDb db;
  db.shots.push_back(shot_with("orthogonal", {0, 1, 0, 0}));
  db.shots.push_back(shot_with("aligned", {1, 0, 0, 0}));
  db.shots.push_back(shot_with("close", {0.6f, 0.8f, 0, 0}));
  const auto candidates = as_candidates(db);
  const embed::Vector query = {1, 0, 0, 0};

  SUBCASE("top f by score") {
    const auto selected = fewshot::select_fewshots(query, candidates, 2);
    REQUIRE(selected.size() == 2);
    CHECK(selected[0] == &db.shots[1]);
    CHECK(selected[1] == &db.shots[2]);
  }
  SUBCASE("f larger than the candidate list selects all, ranked") {
    const auto selected = fewshot::select_fewshots(query, candidates, 5);
    REQUIRE(selected.size() == 3);
    CHECK(selected[0] == &db.shots[1]);
    CHECK(selected[1] == &db.shots[2]);
    CHECK(selected[2] == &db.shots[0]);
  }
  SUBCASE("ties resolve to the earlier candidate") {
    fewshot::FewShotDb tied = db;
    tied.shots.push_back(shot_with("close twin", {0.6f, 0.8f, 0, 0}));
    const auto tied_candidates = as_candidates(tied);
    const auto selected = fewshot::select_fewshots(query, tied_candidates, 3);
    REQUIRE(selected.size() == 3);
    CHECK(selected[1] == &tied.shots[2]);
    CHECK(selected[2] == &tied.shots[3]);
  }
  SUBCASE("selection scores are permutation-invariant") {
    const std::vector<const fewshot::FewShot*> shuffled = {
        &db.shots[2], &db.shots[0], &db.shots[1]};
    const auto a = fewshot::select_fewshots(query, candidates, 2);
    const auto b = fewshot::select_fewshots(query, shuffled, 2);
    REQUIRE(a.size() == b.size());
    std::multiset<double> scores_a;
    std::multiset<double> scores_b;
    for (const fewshot::FewShot* shot : a) {
      scores_a.insert(embed::cosine(query, shot->nlq_embedding));
    }
    for (const fewshot::FewShot* shot : b) {
      scores_b.insert(embed::cosine(query, shot->nlq_embedding));
    }
    CHECK(scores_a == scores_b);
  }
}

TEST_CASE("asking a stored question selects its own shot first") {
  embed::DeterministicProvider provider;
  const fewshot::FewShotDb& db = defender_fsdb();
  const auto candidates = as_candidates(db);
  const auto selected =
      fewshot::select_fewshots(db.shots[5].nlq, candidates, 2, provider);
  REQUIRE(selected.size() == 2);
  CHECK(selected[0] == &db.shots[5]);
}

TEST_CASE("zero-shot mode selects nothing and never embeds") {
  fewshot::FewShotDb db;
  db.shots.push_back(shot_with("only", {1, 0, 0, 0}));
  const auto candidates = as_candidates(db);
  ThrowingProvider provider;
  CHECK(fewshot::select_fewshots("whatever", candidates, 0, provider).empty());
  CHECK(fewshot::select_fewshots(embed::Vector{1, 0, 0, 0}, candidates, 0)
            .empty());
}

TEST_CASE("few-shot store entries carry the question as payload") {
  embed::DeterministicProvider provider;
  fewshot::FewShotDb db;
  db.shots.push_back(shot_with("first question", {1, 0, 0, 0}));
  db.shots.push_back(shot_with("second question", {0, 1, 0, 0}));

  embed::VectorStore store(4, "unit-test");
  fewshot::add_fewshots_to_store(db, store);
  CHECK(store.size() == 2);
  const embed::StoreEntry* first = store.find(embed::fewshot_key(0));
  REQUIRE(first != nullptr);
  CHECK(first->kind == embed::PayloadKind::Fewshot);
  CHECK(first->payload == "first question");
  const embed::StoreEntry* second = store.find(embed::fewshot_key(1));
  REQUIRE(second != nullptr);
  CHECK(second->payload == "second question");
}
