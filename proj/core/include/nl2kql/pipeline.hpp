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
#ifndef NL2KQL_PIPELINE_HPP_
#define NL2KQL_PIPELINE_HPP_

#include <stdexcept>
#include <string>

namespace nl2kql::pipeline {

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pulls the query out of a chat completion: the content of the last fence
// labeled `kusto` (``` and ~~~ fences both count); failing that, the last
// unlabeled fence; failing that, the whole trimmed text. An unclosed
// trailing fence still counts — truncated completions lose their closer.
// Throws PipelineError on an empty (all-whitespace) completion.
std::string extract_kql(const std::string& response_text);

}  // namespace nl2kql::pipeline

#endif  // NL2KQL_PIPELINE_HPP_
