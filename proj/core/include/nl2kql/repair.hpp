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
#ifndef NL2KQL_REPAIR_HPP_
#define NL2KQL_REPAIR_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nl2kql/diagnostics.hpp"
#include "nl2kql/embed.hpp"
#include "nl2kql/schema.hpp"

namespace nl2kql::repair {

// Rule identifiers, in application order. Structural fixes come first
// because identifier substitution assumes a parseable query.
//   between-parens        parenthesize a bare `between lo .. hi` range
//   missing-extend        turn a bare `| Name = expr` stage into extend
//   missing-summarize     give a misplaced aggregate a summarize stage
//   undefined-identifier  rename an unknown column/table to its best match
inline constexpr const char* kRuleBetweenParens = "between-parens";
inline constexpr const char* kRuleMissingExtend = "missing-extend";
inline constexpr const char* kRuleMissingSummarize = "missing-summarize";
inline constexpr const char* kRuleUndefinedIdentifier = "undefined-identifier";

struct RepairOptions {
  // Rule applications; values below 1 are treated as 1.
  std::size_t max_iterations = 3;
  // Minimum cosine for identifier substitution.
  double substitution_threshold = 0.9;
};

struct RepairOutcome {
  // The repaired query when fixed; the untouched input when not.
  std::string final_kql;
  bool fixed = false;
  // Rules that survived the non-regression check, in application order.
  std::vector<std::string> applied_rules;
  // Empty when fixed; the input's own diagnostics otherwise.
  std::vector<kql::Diagnostic> remaining;
  // Rule applications attempted, including rolled-back ones.
  std::size_t iterations = 0;
};

// Parse + validate loop: a clean query returns unchanged; otherwise the
// first matching rule is applied, the query re-rendered and re-checked.
// An application that increases the diagnostic count (or changes nothing)
// is rolled back and its rule disabled for the run. A provider failure
// disables only the undefined-identifier rule.
RepairOutcome repair(const std::string& kql_text, const Schema& schema,
                     embed::EmbeddingProvider& provider,
                     const RepairOptions& options = {});

struct SubstituteCandidate {
  std::string name;
  // Text embedded for the similarity check; callers fall back to the
  // camel-split name when no richer description exists.
  std::string description;
};

// Best-scoring candidate by cosine between the bad identifier (camel-split)
// and each candidate's description, when that score reaches the threshold;
// ties go to the lexicographically smaller name. Embeddings come from one
// provider batch.
std::optional<std::string> substitute_identifier(
    const std::string& bad, const std::vector<SubstituteCandidate>& scope,
    embed::EmbeddingProvider& provider, double threshold = 0.9);

// "ExposureLevel" -> "Exposure Level"; a word break lands before every
// uppercase letter that follows a lowercase letter or digit.
std::string camel_split(const std::string& identifier);

}  // namespace nl2kql::repair

#endif  // NL2KQL_REPAIR_HPP_
