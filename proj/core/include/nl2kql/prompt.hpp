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
#ifndef NL2KQL_PROMPT_HPP_
#define NL2KQL_PROMPT_HPP_

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nl2kql/catalog.hpp"
#include "nl2kql/fewshot.hpp"
#include "nl2kql/refine.hpp"

namespace nl2kql::prompt {

class PromptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Estimated-token ceiling above which callers should warn; the prompt is
// still produced (no truncation policy).
inline constexpr std::size_t kDefaultTokenWarnLimit = 24000;

struct PromptBundle {
  std::string rendered;
  // Placeholder name -> the text that replaced it, e.g. "SCHEMA_PLACEHOLDER".
  std::map<std::string, std::string> sections;
  std::size_t token_estimate = 0;
};

// The prompt template is a versioned asset with four {{NAME_PLACEHOLDER}}
// slots (SCHEMA, VALUES, EXAMPLES, USER_REQUEST); everything else is static
// text that must survive rendering byte-for-byte.
std::string load_template_file(const std::string& path);

// One block per table:
//   Name: <table>
//   Description: <description>
//   Columns: ['C1', 'C2', ...]
// separated by blank lines.
std::string schema_section(
    const std::vector<const catalog::CatalogTable*>& tables);

// One line per column with candidates, in candidate order:
//   <table>.<column> can be: v1, v2, ...
// "(no values available)" when the list is empty.
std::string values_section(
    const std::vector<refine::CandidateValue>& candidate_values);

// One block per shot: "Request: <nlq>" followed by a ~~~kusto fence.
// "(no examples available)" when the list is empty (zero-shot mode).
std::string examples_section(
    const std::vector<const fewshot::FewShot*>& shots);

// Rough chars/4 heuristic, for overflow warnings only.
std::size_t estimate_tokens(const std::string& text);

// Fills every placeholder; throws PromptError when the NLQ is empty, a
// required placeholder is missing from the template, or any {{...}} slot
// survives rendering.
PromptBundle build_prompt(const std::string& template_text,
                          const refine::RefinedSchema& refined,
                          const std::vector<const fewshot::FewShot*>& shots,
                          const std::string& nlq);

}  // namespace nl2kql::prompt

#endif  // NL2KQL_PROMPT_HPP_
