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
#include "nl2kql/fewshot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "nl2kql/analysis.hpp"
#include "nl2kql/parser.hpp"

namespace nl2kql::fewshot {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view text) {
  const char* ws = " \t\r\n";
  const auto begin = text.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(ws);
  return text.substr(begin, end - begin + 1);
}

}  // namespace

FewShotDb load_fsdb(const std::string& jsonl_text, const std::string& origin,
                    const catalog::DataCatalog& catalog,
                    embed::EmbeddingProvider& provider) {
  FewShotDb db;
  db.database = catalog.database;
  const Schema schema = catalog.to_schema();

  std::vector<std::string> offenders;
  auto offend = [&offenders](std::size_t line, const std::string& what) {
    offenders.push_back("line " + std::to_string(line) + ": " + what);
  };

  std::istringstream in(jsonl_text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      offend(line_no, std::string("invalid JSON: ") + e.what());
      continue;
    }
    if (!record.is_object() || !record.contains("nlq") ||
        !record["nlq"].is_string() || !record.contains("kql") ||
        !record["kql"].is_string()) {
      offend(line_no, "record must be an object with string nlq and kql");
      continue;
    }

    FewShot shot;
    shot.nlq = std::string(trim(record["nlq"].get<std::string>()));
    shot.kql = std::string(trim(record["kql"].get<std::string>()));
    if (shot.nlq.empty()) {
      offend(line_no, "nlq is empty");
      continue;
    }

    const kql::ParseResult parsed = kql::parse(shot.kql);
    if (!parsed.syntactically_correct()) {
      offend(line_no, "syntax: " + parsed.diagnostics.front().message);
      continue;
    }
    const std::vector<kql::Diagnostic> semantic =
        kql::validate(parsed.query, schema);
    if (!semantic.empty()) {
      offend(line_no, "semantic: " + semantic.front().message);
      continue;
    }

    const std::vector<std::string> tables = kql::extract_tables(parsed.query);
    shot.referenced_tables.insert(tables.begin(), tables.end());
    db.shots.push_back(std::move(shot));
  }

  if (!offenders.empty()) {
    std::string message = origin + ": " + std::to_string(offenders.size()) +
                          " invalid shot(s)";
    for (const std::string& offender : offenders) message += "; " + offender;
    throw FewshotError(message);
  }

  std::vector<std::string> questions;
  questions.reserve(db.shots.size());
  for (const FewShot& shot : db.shots) questions.push_back(shot.nlq);
  if (!questions.empty()) {
    const std::vector<embed::Vector> vectors = provider.embed_batch(questions);
    if (vectors.size() != db.shots.size()) {
      throw FewshotError(origin + ": provider returned " +
                         std::to_string(vectors.size()) + " vectors for " +
                         std::to_string(db.shots.size()) + " questions");
    }
    for (std::size_t i = 0; i < db.shots.size(); ++i) {
      db.shots[i].nlq_embedding = vectors[i];
      embed::l2_normalize(db.shots[i].nlq_embedding);
    }
  }
  return db;
}

FewShotDb load_fsdb_file(const std::string& path,
                         const catalog::DataCatalog& catalog,
                         embed::EmbeddingProvider& provider) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FewshotError("cannot read few-shot file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_fsdb(buffer.str(), path, catalog, provider);
}

std::vector<const FewShot*> filter_schema_relevant(
    const FewShotDb& db, const std::set<std::string>& accessible) {
  std::vector<const FewShot*> out;
  for (const FewShot& shot : db.shots) {
    const bool relevant = std::all_of(
        shot.referenced_tables.begin(), shot.referenced_tables.end(),
        [&accessible](const std::string& t) { return accessible.count(t) > 0; });
    if (relevant) out.push_back(&shot);
  }
  return out;
}

std::vector<const FewShot*> select_fewshots(
    const embed::Vector& nlq_embedding,
    const std::vector<const FewShot*>& candidates, std::size_t f) {
  if (f == 0) return {};
  // (score, candidate position); stable sort keeps earlier candidates ahead
  // on ties.
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scored.emplace_back(
        embed::cosine(nlq_embedding, candidates[i]->nlq_embedding), i);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<const FewShot*> out;
  const std::size_t take = std::min(f, scored.size());
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(candidates[scored[i].second]);
  return out;
}

std::vector<const FewShot*> select_fewshots(
    const std::string& nlq, const std::vector<const FewShot*>& candidates,
    std::size_t f, embed::EmbeddingProvider& provider) {
  if (f == 0) return {};
  return select_fewshots(embed::embed_text(provider, nlq), candidates, f);
}

void add_fewshots_to_store(const FewShotDb& db, embed::VectorStore& store) {
  for (std::size_t i = 0; i < db.shots.size(); ++i) {
    store.add(embed::fewshot_key(i), embed::PayloadKind::Fewshot,
              db.shots[i].nlq, db.shots[i].nlq_embedding);
  }
}

}  // namespace nl2kql::fewshot
