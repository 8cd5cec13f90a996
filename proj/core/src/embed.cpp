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
#include "nl2kql/embed.hpp"

#include <cmath>
#include <cstdint>

#include "fnv1a.hpp"

namespace nl2kql::embed {
namespace {

using detail::fnv1a64;

// Pre-normalization counts are integers so every platform agrees exactly.
void add_feature(std::vector<std::int64_t>& counts, const std::string& feature) {
  const std::size_t bucket = fnv1a64(feature) % kDeterministicDimension;
  const bool negative = (fnv1a64(feature + "#") & 1u) != 0;
  counts[bucket] += negative ? -1 : 1;
}

std::string_view trim(std::string_view text) {
  const char* ws = " \t\r\n\f\v";
  const auto begin = text.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(ws);
  return text.substr(begin, end - begin + 1);
}

}  // namespace

Vector deterministic_embed(std::string_view text) {
  std::vector<std::int64_t> counts(kDeterministicDimension, 0);
  std::string token;
  auto flush_token = [&counts, &token] {
    if (token.empty()) return;
    add_feature(counts, "w:" + token);
    if (token.size() >= 3) {
      for (std::size_t i = 0; i + 3 <= token.size(); ++i) {
        add_feature(counts, "t:" + token.substr(i, 3));
      }
    }
    token.clear();
  };
  for (char raw : text) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      token.push_back(c);
    } else {
      flush_token();
    }
  }
  flush_token();

  Vector v(kDeterministicDimension, 0.0f);
  for (std::size_t i = 0; i < kDeterministicDimension; ++i) {
    v[i] = static_cast<float>(counts[i]);
  }
  l2_normalize(v);
  return v;
}

std::vector<Vector> DeterministicProvider::embed_batch(
    const std::vector<std::string>& texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const std::string& text : texts) out.push_back(deterministic_embed(text));
  return out;
}

double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw EmbedError("cosine: dimension mismatch (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    norm_a += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    norm_b += static_cast<double>(b[i]) * static_cast<double>(b[i]);
  }
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

void l2_normalize(Vector& v) {
  double norm_sq = 0.0;
  for (float x : v) norm_sq += static_cast<double>(x) * static_cast<double>(x);
  if (norm_sq == 0.0) return;
  const double norm = std::sqrt(norm_sq);
  for (float& x : v) x = static_cast<float>(static_cast<double>(x) / norm);
}

Vector embed_text(EmbeddingProvider& provider, const std::string& text) {
  std::string_view trimmed = trim(text);
  if (trimmed.empty()) {
    throw EmbedError("embed_text: text is empty after trimming");
  }
  if (trimmed.size() > provider.max_input_bytes()) {
    trimmed = trimmed.substr(0, provider.max_input_bytes());
  }
  std::vector<Vector> vectors = provider.embed_batch({std::string(trimmed)});
  if (vectors.size() != 1 || vectors[0].size() != provider.dimension()) {
    throw EmbedError("embed_text: provider returned a malformed batch");
  }
  l2_normalize(vectors[0]);
  return std::move(vectors[0]);
}

}  // namespace nl2kql::embed
