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
#include "nl2kql/synthgen.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "nl2kql/analysis.hpp"
#include "nl2kql/lexer.hpp"
#include "nl2kql/parser.hpp"
#include "nl2kql/pipeline.hpp"
#include "nl2kql/prompt.hpp"

namespace nl2kql::synthgen {

namespace {

using nlohmann::json;

constexpr std::array<Theme, 5> kThemes = {{
    {ThemeId::Explore, "Explore",
     "Look for signs or hints of a security attack"},
    {ThemeId::Expansion, "Expansion",
     "Searches for additional contextual understanding for the scenario"},
    {ThemeId::Detect, "Detect", "Look for events related to a security attack"},
    {ThemeId::Remediate, "Remediate",
     "Identify all evens for a given entity or asset"},
    {ThemeId::Report, "Report",
     "Provide summary statistics that helps with writing a report"},
}};

std::set<std::string> token_set(std::string_view text) {
  std::vector<kql::Diagnostic> ignored;
  std::set<std::string> out;
  for (auto& token : kql::tokenize(text, ignored)) {
    if (!token.is_trivia()) out.insert(std::move(token.text));
  }
  return out;
}

std::string schema_block(const catalog::DataCatalog& catalog,
                         const std::vector<std::string>& tables) {
  std::vector<const catalog::CatalogTable*> selected;
  for (const auto& name : tables) {
    if (const auto* table = catalog.find_table(name)) selected.push_back(table);
  }
  return prompt::schema_section(selected);
}

// Shared scaffold of the generation and regeneration prompts; the
// regeneration variant carries the natural-language request to answer.
std::string task_prompt(const catalog::DataCatalog& catalog,
                        const std::vector<std::string>& tables,
                        const Theme& theme, const std::string* nlq) {
  std::string out =
      "You write Kusto Query Language (KQL) queries for a security "
      "analyst.\n\n# Schema\n\n";
  out += schema_block(catalog, tables);
  out += "\n\n# Theme\n\n";
  out += theme.name;
  out += ": ";
  out += theme.instruction;
  if (nlq != nullptr) {
    out += "\n\n# User Request\n\n" + *nlq;
  }
  out +=
      "\n\n# Task\n\nWrite exactly one KQL query over the tables above";
  out += nlq == nullptr ? " that fits the theme."
                        : " that answers the user request.";
  out +=
      " Use only the listed tables and columns. Kusto syntax: a source table "
      "followed by |-separated operators; design options include where "
      "filters, summarize aggregations with by keys, join kind=inner on a "
      "shared key, project or extend for shaping, order by, and take.\n\n"
      "Reply with the query in one fenced block:\n~~~kusto\n<query>\n~~~\n";
  return out;
}

json candidate_to_json(const SynthCandidate& candidate) {
  json j;
  j["tables"] = candidate.tables;
  j["theme"] = std::string(theme(candidate.theme).name);
  j["verdict"] = std::string(verdict_name(candidate.verdict));
  j["token_jaccard"] = candidate.token_jaccard;
  j["nlq"] = candidate.nlq;
  j["primary_kql"] = candidate.primary_kql;
  j["secondary_kql"] = candidate.secondary_kql;
  if (!candidate.abort_reason.empty()) j["abort_reason"] = candidate.abort_reason;
  return j;
}

}  // namespace

const std::array<Theme, 5>& themes() { return kThemes; }

const Theme& theme(ThemeId id) {
  for (const auto& t : kThemes) {
    if (t.id == id) return t;
  }
  return kThemes[0];
}

std::vector<std::string> sample_tables(const catalog::DataCatalog& catalog,
                                       Rng& rng) {
  const auto& tables = catalog.tables;
  if (tables.empty()) throw SynthError("synthgen: catalog has no tables");

  std::uniform_int_distribution<std::size_t> any(0, tables.size() - 1);
  bool join = tables.size() >= 2 && std::bernoulli_distribution(0.3)(rng);
  std::size_t first = any(rng);
  if (!join) return {tables[first].name};

  std::vector<std::size_t> partners;
  if (std::bernoulli_distribution(0.5)(rng)) {
    // Type-similar partner: shares at least one declared column type.
    std::set<std::string> first_types;
    for (const auto& column : tables[first].columns) {
      first_types.insert(column.type);
    }
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (i == first) continue;
      for (const auto& column : tables[i].columns) {
        if (first_types.count(column.type)) {
          partners.push_back(i);
          break;
        }
      }
    }
  }
  if (partners.empty()) {
    // Uniform branch, or nothing shares a type with the first table.
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (i != first) partners.push_back(i);
    }
  }
  std::uniform_int_distribution<std::size_t> pick(0, partners.size() - 1);
  return {tables[first].name, tables[partners[pick(rng)]].name};
}

const Theme& sample_theme(Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, kThemes.size() - 1);
  return kThemes[pick(rng)];
}

double token_jaccard(std::string_view kql_a, std::string_view kql_b) {
  std::set<std::string> a = token_set(kql_a);
  std::set<std::string> b = token_set(kql_b);
  if (a.empty() && b.empty()) return 1.0;
  std::size_t intersection = 0;
  for (const auto& text : a) {
    if (b.count(text)) ++intersection;
  }
  std::size_t union_size = a.size() + b.size() - intersection;
  return static_cast<double>(intersection) / static_cast<double>(union_size);
}

std::vector<llm::ChatMessage> generation_messages(
    const catalog::DataCatalog& catalog, const std::vector<std::string>& tables,
    const Theme& theme) {
  return {{"user", task_prompt(catalog, tables, theme, nullptr)}};
}

std::vector<llm::ChatMessage> explanation_messages(const std::string& kql) {
  std::string content =
      "Explain the following Kusto Query Language (KQL) query as a single "
      "imperative natural-language request, phrased the way an analyst would "
      "ask for it. Reply with the request text only.\n\n~~~kusto\n" +
      kql + "\n~~~\n";
  return {{"user", std::move(content)}};
}

std::vector<llm::ChatMessage> regeneration_messages(
    const catalog::DataCatalog& catalog, const std::vector<std::string>& tables,
    const Theme& theme, const std::string& nlq) {
  return {{"user", task_prompt(catalog, tables, theme, &nlq)}};
}

std::string generate_candidate(const catalog::DataCatalog& catalog,
                               const std::vector<std::string>& tables,
                               const Theme& theme, llm::ChatClient& client) {
  std::string reply = client.complete(generation_messages(catalog, tables, theme));
  return pipeline::extract_kql(reply);
}

std::string_view verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::Accepted:
      return "accepted";
    case Verdict::RejectedSyntax:
      return "rejected-syntax";
    case Verdict::RejectedSemantic:
      return "rejected-semantic";
    case Verdict::RejectedSimilarity:
      return "rejected-similarity";
    case Verdict::Aborted:
      return "aborted";
  }
  return "aborted";
}

SynthCandidate round_trip(const std::string& primary_kql,
                          const catalog::DataCatalog& catalog,
                          const std::vector<std::string>& tables,
                          const Theme& theme, llm::ChatClient& client,
                          double threshold) {
  SynthCandidate candidate;
  candidate.tables = tables;
  candidate.theme = theme.id;
  candidate.primary_kql = primary_kql;
  candidate.verdict = Verdict::Aborted;

  try {
    std::string nlq = client.complete(explanation_messages(primary_kql));
    // Trim: an explanation is prose, not something whitespace belongs around.
    auto begin = nlq.find_first_not_of(" \t\r\n");
    auto end = nlq.find_last_not_of(" \t\r\n");
    candidate.nlq =
        begin == std::string::npos ? "" : nlq.substr(begin, end - begin + 1);
    if (candidate.nlq.empty()) {
      candidate.abort_reason = "empty explanation";
      return candidate;
    }
    std::string reply = client.complete(
        regeneration_messages(catalog, tables, theme, candidate.nlq));
    candidate.secondary_kql = pipeline::extract_kql(reply);
  } catch (const llm::TransportError& error) {
    candidate.abort_reason = error.what();
    return candidate;
  } catch (const pipeline::PipelineError& error) {
    candidate.abort_reason = error.what();
    return candidate;
  }

  candidate.token_jaccard =
      token_jaccard(candidate.primary_kql, candidate.secondary_kql);

  Schema schema = catalog.to_schema();
  kql::ParseResult primary = kql::parse(candidate.primary_kql);
  kql::ParseResult secondary = kql::parse(candidate.secondary_kql);
  if (!primary.syntactically_correct() || !secondary.syntactically_correct()) {
    candidate.verdict = Verdict::RejectedSyntax;
    return candidate;
  }
  if (!kql::validate(primary.query, schema).empty() ||
      !kql::validate(secondary.query, schema).empty()) {
    candidate.verdict = Verdict::RejectedSemantic;
    return candidate;
  }
  if (candidate.token_jaccard < threshold) {
    candidate.verdict = Verdict::RejectedSimilarity;
    return candidate;
  }
  candidate.verdict = Verdict::Accepted;
  return candidate;
}

SynthReport synthesize(const catalog::DataCatalog& catalog, std::size_t count,
                       std::uint64_t seed, llm::ChatClient& client,
                       double threshold) {
  SynthReport report;
  report.requested = count;
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::string> tables = sample_tables(catalog, rng);
    const Theme& t = sample_theme(rng);

    SynthCandidate candidate;
    try {
      std::string primary = generate_candidate(catalog, tables, t, client);
      candidate = round_trip(primary, catalog, tables, t, client, threshold);
    } catch (const llm::TransportError& error) {
      candidate.tables = tables;
      candidate.theme = t.id;
      candidate.verdict = Verdict::Aborted;
      candidate.abort_reason = error.what();
    } catch (const pipeline::PipelineError& error) {
      candidate.tables = tables;
      candidate.theme = t.id;
      candidate.verdict = Verdict::Aborted;
      candidate.abort_reason = error.what();
    }

    switch (candidate.verdict) {
      case Verdict::Accepted:
        ++report.accepted;
        break;
      case Verdict::RejectedSyntax:
        ++report.rejected_syntax;
        break;
      case Verdict::RejectedSemantic:
        ++report.rejected_semantic;
        break;
      case Verdict::RejectedSimilarity:
        ++report.rejected_similarity;
        break;
      case Verdict::Aborted:
        ++report.aborted;
        break;
    }
    report.candidates.push_back(std::move(candidate));
  }
  return report;
}

std::string report_to_json(const SynthReport& report) {
  json j;
  j["requested"] = report.requested;
  j["accepted"] = report.accepted;
  j["rejected_syntax"] = report.rejected_syntax;
  j["rejected_semantic"] = report.rejected_semantic;
  j["rejected_similarity"] = report.rejected_similarity;
  j["aborted"] = report.aborted;
  json candidates = json::array();
  for (const auto& candidate : report.candidates) {
    candidates.push_back(candidate_to_json(candidate));
  }
  j["candidates"] = std::move(candidates);
  return j.dump(2) + "\n";
}

std::size_t append_accepted(const SynthReport& report,
                            const std::string& fsdb_path) {
  std::set<std::string> seen;
  {
    // Existing questions win over new ones; unreadable lines are someone
    // else's problem (the loader reports them) and do not block appending.
    std::ifstream in(fsdb_path);
    std::string line;
    while (std::getline(in, line)) {
      json record = json::parse(line, nullptr, false);
      if (record.is_object() && record.contains("nlq") &&
          record["nlq"].is_string()) {
        seen.insert(record["nlq"].get<std::string>());
      }
    }
  }

  std::ofstream out(fsdb_path, std::ios::app);
  if (!out) {
    throw SynthError("synthgen: cannot open " + fsdb_path + " for append");
  }
  std::size_t written = 0;
  for (const auto& candidate : report.candidates) {
    if (candidate.verdict != Verdict::Accepted) continue;
    if (!seen.insert(candidate.nlq).second) continue;
    json record;
    record["nlq"] = candidate.nlq;
    record["kql"] = candidate.primary_kql;
    out << record.dump() << "\n";
    ++written;
  }
  out.flush();
  if (!out) throw SynthError("synthgen: write to " + fsdb_path + " failed");
  return written;
}

}  // namespace nl2kql::synthgen
