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
#ifndef NL2KQL_SYNTHGEN_HPP_
#define NL2KQL_SYNTHGEN_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nl2kql/catalog.hpp"
#include "nl2kql/llm.hpp"

namespace nl2kql::synthgen {

class SynthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Example-generation themes. The instruction strings are a fixed contract;
// transcripts and goldens depend on their exact bytes.
enum class ThemeId { Explore, Expansion, Detect, Remediate, Report };

struct Theme {
  ThemeId id;
  std::string_view name;
  std::string_view instruction;
};

const std::array<Theme, 5>& themes();
const Theme& theme(ThemeId id);

inline constexpr double kDefaultSimilarityThreshold = 0.7;

// All sampling runs off one seeded generator so a run is reproducible.
using Rng = std::mt19937_64;

// One table name with probability 0.7; otherwise a pair of distinct tables
// where half the time the partner is drawn only from tables sharing at least
// one column type with the first (falling back to uniform when none do).
// A single-table catalog always yields one table.
std::vector<std::string> sample_tables(const catalog::DataCatalog& catalog,
                                       Rng& rng);

// Uniform over the five themes.
const Theme& sample_theme(Rng& rng);

// Jaccard similarity of the two queries' sets of non-trivia token texts,
// case-sensitive. Two token-free strings count as identical (score 1).
double token_jaccard(std::string_view kql_a, std::string_view kql_b);

// Chat messages for the three generation steps. Exposed so transcript
// fixtures can be keyed against the exact request bytes.
std::vector<llm::ChatMessage> generation_messages(
    const catalog::DataCatalog& catalog, const std::vector<std::string>& tables,
    const Theme& theme);
std::vector<llm::ChatMessage> explanation_messages(const std::string& kql);
std::vector<llm::ChatMessage> regeneration_messages(
    const catalog::DataCatalog& catalog, const std::vector<std::string>& tables,
    const Theme& theme, const std::string& nlq);

// Asks the model for a query over the sampled tables and returns the fenced
// KQL from its reply. Throws llm::TransportError on client failure.
std::string generate_candidate(const catalog::DataCatalog& catalog,
                               const std::vector<std::string>& tables,
                               const Theme& theme, llm::ChatClient& client);

enum class Verdict {
  Accepted,
  RejectedSyntax,
  RejectedSemantic,
  RejectedSimilarity,
  // Client failure mid-candidate; excluded from rejection statistics.
  Aborted,
};

std::string_view verdict_name(Verdict verdict);

struct SynthCandidate {
  std::vector<std::string> tables;
  ThemeId theme = ThemeId::Explore;
  std::string primary_kql;
  std::string nlq;
  std::string secondary_kql;
  double token_jaccard = 0.0;
  Verdict verdict = Verdict::Aborted;
  std::string abort_reason;  // set only for Aborted
};

// Round-trip gate: explain the query, regenerate from the explanation, and
// accept only when both queries are diagnostic-free and their token overlap
// reaches the threshold. Checks run syntax, then semantics, then similarity;
// the first failure decides the verdict.
SynthCandidate round_trip(const std::string& primary_kql,
                          const catalog::DataCatalog& catalog,
                          const std::vector<std::string>& tables,
                          const Theme& theme, llm::ChatClient& client,
                          double threshold = kDefaultSimilarityThreshold);

struct SynthReport {
  std::size_t requested = 0;
  std::size_t accepted = 0;
  std::size_t rejected_syntax = 0;
  std::size_t rejected_semantic = 0;
  std::size_t rejected_similarity = 0;
  std::size_t aborted = 0;
  std::vector<SynthCandidate> candidates;  // every candidate, in run order
};

// Generates `count` candidates end to end. Same seed + same scripted client
// = identical report.
SynthReport synthesize(const catalog::DataCatalog& catalog, std::size_t count,
                       std::uint64_t seed, llm::ChatClient& client,
                       double threshold = kDefaultSimilarityThreshold);

// Counts per verdict plus one entry per candidate, stable across runs.
std::string report_to_json(const SynthReport& report);

// Appends accepted candidates to a few-shot JSONL file as {"nlq", "kql"}
// records. A question already present in the file (or earlier in the batch)
// keeps its first query. Returns the number of records written.
std::size_t append_accepted(const SynthReport& report,
                            const std::string& fsdb_path);

}  // namespace nl2kql::synthgen

#endif  // NL2KQL_SYNTHGEN_HPP_
