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
#ifndef NL2KQL_FEWSHOT_HPP_
#define NL2KQL_FEWSHOT_HPP_

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nl2kql/catalog.hpp"
#include "nl2kql/embed.hpp"
#include "nl2kql/vector_store.hpp"

namespace nl2kql::fewshot {

class FewshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FewShot {
  std::string nlq;
  std::string kql;
  embed::Vector nlq_embedding;
  // Catalog tables the query reads, cached from the parser at load time.
  std::set<std::string> referenced_tables;
};

struct FewShotDb {
  std::string database;
  std::vector<FewShot> shots;
};

// Few-shot file: JSONL, one {"nlq": ..., "kql": ...} object per line.
// Every query must parse cleanly and validate against the catalog; a load
// with any invalid shot fails listing every offender by line. Question
// embeddings are computed here, in one provider batch.
FewShotDb load_fsdb(const std::string& jsonl_text, const std::string& origin,
                    const catalog::DataCatalog& catalog,
                    embed::EmbeddingProvider& provider);
FewShotDb load_fsdb_file(const std::string& path,
                         const catalog::DataCatalog& catalog,
                         embed::EmbeddingProvider& provider);

// Shots whose referenced tables all lie inside `accessible`, in database
// order. Pointers share the database's lifetime.
std::vector<const FewShot*> filter_schema_relevant(
    const FewShotDb& db, const std::set<std::string>& accessible);

// Top-f candidates by cosine between the question embedding and each shot's
// stored embedding; ties resolve to the earlier candidate. f = 0 selects
// nothing (zero-shot mode) without touching the provider.
std::vector<const FewShot*> select_fewshots(
    const embed::Vector& nlq_embedding,
    const std::vector<const FewShot*>& candidates, std::size_t f);
std::vector<const FewShot*> select_fewshots(
    const std::string& nlq, const std::vector<const FewShot*>& candidates,
    std::size_t f, embed::EmbeddingProvider& provider);

// Persists shot embeddings as fewshot:<index> entries (payload = question).
void add_fewshots_to_store(const FewShotDb& db, embed::VectorStore& store);

}  // namespace nl2kql::fewshot

#endif  // NL2KQL_FEWSHOT_HPP_
