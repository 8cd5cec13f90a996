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
#include "nl2kql/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

namespace nl2kql::pipeline {
namespace {

std::string trim(const std::string& text) {
  const char* ws = " \t\r\n";
  const auto begin = text.find_first_not_of(ws);
  if (begin == std::string::npos) return {};
  const auto end = text.find_last_not_of(ws);
  return text.substr(begin, end - begin + 1);
}

struct Fence {
  std::string label;  // lowercased info string, "" when unlabeled
  std::string body;
};

// A fence line is ``` or ~~~ (3+ of the same character) after optional
// indentation; the opener may carry a label, the closer may not.
bool fence_line(const std::string& line, char& fence_char, std::string& rest) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  if (i >= line.size() || (line[i] != '`' && line[i] != '~')) return false;
  const char c = line[i];
  std::size_t run = 0;
  while (i + run < line.size() && line[i + run] == c) ++run;
  if (run < 3) return false;
  fence_char = c;
  rest = trim(line.substr(i + run));
  return true;
}

std::vector<Fence> collect_fences(const std::string& text) {
  std::vector<Fence> fences;
  std::istringstream in(text);
  std::string line;
  bool open = false;
  char open_char = 0;
  Fence current;
  std::string body;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    char c = 0;
    std::string rest;
    if (fence_line(line, c, rest)) {
      if (!open) {
        open = true;
        open_char = c;
        current.label = rest;
        std::transform(current.label.begin(), current.label.end(),
                       current.label.begin(),
                       [](unsigned char ch) { return std::tolower(ch); });
        body.clear();
        continue;
      }
      if (c == open_char && rest.empty()) {
        current.body = body;
        fences.push_back(current);
        open = false;
        continue;
      }
      // A mismatched fence line inside an open fence is ordinary content.
    }
    if (open) {
      if (!body.empty()) body += "\n";
      body += line;
    }
  }
  if (open) {
    current.body = body;
    fences.push_back(current);
  }
  return fences;
}

}  // namespace

std::string extract_kql(const std::string& response_text) {
  const std::string whole = trim(response_text);
  if (whole.empty()) {
    throw PipelineError("empty-completion: model returned no text");
  }
  const std::vector<Fence> fences = collect_fences(response_text);
  for (auto it = fences.rbegin(); it != fences.rend(); ++it) {
    if (it->label == "kusto") return trim(it->body);
  }
  for (auto it = fences.rbegin(); it != fences.rend(); ++it) {
    if (it->label.empty()) return trim(it->body);
  }
  return whole;
}

}  // namespace nl2kql::pipeline
