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
#ifndef NL2KQL_REFINE_HPP_
#define NL2KQL_REFINE_HPP_

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nl2kql/catalog.hpp"
#include "nl2kql/embed.hpp"
#include "nl2kql/vector_store.hpp"

namespace nl2kql::refine {

class RefineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One enum value judged relevant to the question.
struct CandidateValue {
  std::string table;
  std::string column;
  std::string value;
  double score = 0.0;
};

// Schema slice handed to prompt building: at most t accessible tables with
// all of their columns, plus at most v_n candidate values per enum column.
// Table pointers reference the catalog passed to refine_schema and share
// its lifetime.
struct RefinedSchema {
  std::vector<const catalog::CatalogTable*> tables;
  std::vector<CandidateValue> candidate_values;
  embed::Vector nlq_embedding;
};

// Permission filter first, then cosine ranking against the question:
// top-t tables (kind=table entries restricted to `accessible`), every column
// of each selected table, and per enum column the top-v_n values ranked by
// the same question embedding. Throws RefineError when `accessible` is empty
// or the store does not cover the catalog; provider failures propagate.
RefinedSchema refine_schema(const std::string& nlq,
                            const catalog::DataCatalog& catalog,
                            const std::set<std::string>& accessible,
                            std::size_t t, std::size_t v_n,
                            const embed::VectorStore& store,
                            embed::EmbeddingProvider& provider);

}  // namespace nl2kql::refine

#endif  // NL2KQL_REFINE_HPP_
