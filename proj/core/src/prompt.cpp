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
#include "nl2kql/prompt.hpp"

#include <fstream>
#include <sstream>

namespace nl2kql::prompt {
namespace {

const char* const kPlaceholders[] = {
    "SCHEMA_PLACEHOLDER",
    "VALUES_PLACEHOLDER",
    "EXAMPLES_PLACEHOLDER",
    "USER_REQUEST_PLACEHOLDER",
};

// Replaces the single occurrence of {{name}}; presence was checked upfront.
void fill_placeholder(std::string& text, const std::string& name,
                      const std::string& value) {
  const std::string slot = "{{" + name + "}}";
  text.replace(text.find(slot), slot.size(), value);
}

}  // namespace

std::string load_template_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PromptError("cannot read prompt template '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string schema_section(
    const std::vector<const catalog::CatalogTable*>& tables) {
  std::string out;
  for (const catalog::CatalogTable* table : tables) {
    if (!out.empty()) out += "\n\n";
    out += "Name: " + table->name + "\n";
    out += "Description:";
    if (!table->description.empty()) out += " " + table->description;
    out += "\nColumns: [";
    for (std::size_t i = 0; i < table->columns.size(); ++i) {
      if (i > 0) out += ", ";
      out += "'" + table->columns[i].name + "'";
    }
    out += "]";
  }
  return out;
}

std::string values_section(
    const std::vector<refine::CandidateValue>& candidate_values) {
  if (candidate_values.empty()) return "(no values available)";
  std::string out;
  std::size_t i = 0;
  while (i < candidate_values.size()) {
    const auto& head = candidate_values[i];
    if (!out.empty()) out += "\n";
    out += head.table + "." + head.column + " can be: " + head.value;
    ++i;
    while (i < candidate_values.size() &&
           candidate_values[i].table == head.table &&
           candidate_values[i].column == head.column) {
      out += ", " + candidate_values[i].value;
      ++i;
    }
  }
  return out;
}

std::string examples_section(
    const std::vector<const fewshot::FewShot*>& shots) {
  if (shots.empty()) return "(no examples available)";
  std::string out;
  for (const fewshot::FewShot* shot : shots) {
    if (!out.empty()) out += "\n\n";
    out += "Request: " + shot->nlq + "\n~~~kusto\n" + shot->kql + "\n~~~";
  }
  return out;
}

std::size_t estimate_tokens(const std::string& text) {
  return (text.size() + 3) / 4;
}

PromptBundle build_prompt(const std::string& template_text,
                          const refine::RefinedSchema& refined,
                          const std::vector<const fewshot::FewShot*>& shots,
                          const std::string& nlq) {
  if (nlq.empty()) throw PromptError("prompt: empty user request");
  for (const char* name : kPlaceholders) {
    const std::string slot = std::string("{{") + name + "}}";
    const auto first = template_text.find(slot);
    if (first == std::string::npos) {
      throw PromptError("prompt: template is missing " + slot);
    }
    if (template_text.find(slot, first + 1) != std::string::npos) {
      throw PromptError("prompt: template repeats " + slot);
    }
  }

  PromptBundle bundle;
  bundle.sections["SCHEMA_PLACEHOLDER"] = schema_section(refined.tables);
  bundle.sections["VALUES_PLACEHOLDER"] =
      values_section(refined.candidate_values);
  bundle.sections["EXAMPLES_PLACEHOLDER"] = examples_section(shots);
  bundle.sections["USER_REQUEST_PLACEHOLDER"] = nlq;

  bundle.rendered = template_text;
  for (const char* name : kPlaceholders) {
    fill_placeholder(bundle.rendered, name, bundle.sections.at(name));
  }
  // Sections are caller data and may legitimately contain braces, so scan
  // only for placeholder-shaped leftovers of the template itself.
  const auto leftover = bundle.rendered.find("{{");
  if (leftover != std::string::npos &&
      bundle.rendered.find("_PLACEHOLDER}}", leftover) != std::string::npos) {
    throw PromptError("prompt: unfilled placeholder in template");
  }
  bundle.token_estimate = estimate_tokens(bundle.rendered);
  return bundle;
}

}  // namespace nl2kql::prompt
