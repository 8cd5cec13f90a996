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
#include "nl2kql/refine.hpp"

#include <algorithm>
#include <string_view>

namespace nl2kql::refine {
namespace {

constexpr std::string_view kTableKeyPrefix = "table:";

std::string table_name_of(const std::string& key) {
  return key.substr(kTableKeyPrefix.size());
}

}  // namespace

RefinedSchema refine_schema(const std::string& nlq,
                            const catalog::DataCatalog& catalog,
                            const std::set<std::string>& accessible,
                            std::size_t t, std::size_t v_n,
                            const embed::VectorStore& store,
                            embed::EmbeddingProvider& provider) {
  if (accessible.empty()) {
    throw RefineError("refine: empty permission scope, no table is accessible");
  }

  RefinedSchema refined;
  refined.nlq_embedding = embed::embed_text(provider, nlq);

  // The permission filter runs before ranking, so an inaccessible table can
  // never crowd out an accessible one.
  const auto ranked = store.top_k(
      refined.nlq_embedding, t, embed::PayloadKind::Table,
      [&accessible](const embed::StoreEntry& entry) {
        return accessible.count(table_name_of(entry.key)) > 0;
      });

  for (const auto& [key, score] : ranked) {
    const catalog::CatalogTable* table = catalog.find_table(table_name_of(key));
    if (table == nullptr) {
      throw RefineError("refine: store entry '" + key +
                        "' has no table in the catalog");
    }
    refined.tables.push_back(table);
  }

  for (const catalog::CatalogTable* table : refined.tables) {
    for (const catalog::CatalogColumn& column : table->columns) {
      if (!column.is_enum() || column.values.empty() || v_n == 0) continue;
      std::vector<CandidateValue> candidates;
      candidates.reserve(column.values.size());
      for (const catalog::CatalogValue& value : column.values) {
        const embed::StoreEntry* entry =
            store.find(embed::value_key(table->name, column.name, value.value));
        if (entry == nullptr) {
          throw RefineError("refine: store is missing the value entry for " +
                            table->name + "." + column.name + "=" + value.value);
        }
        candidates.push_back(
            {table->name, column.name, value.value,
             embed::cosine(refined.nlq_embedding, entry->vector)});
      }
      std::sort(candidates.begin(), candidates.end(),
                [](const CandidateValue& a, const CandidateValue& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.value < b.value;
                });
      if (candidates.size() > v_n) candidates.resize(v_n);
      refined.candidate_values.insert(refined.candidate_values.end(),
                                      candidates.begin(), candidates.end());
    }
  }
  return refined;
}

}  // namespace nl2kql::refine
