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
#ifndef NL2KQL_EMBED_HPP_
#define NL2KQL_EMBED_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nl2kql::embed {

using Vector = std::vector<float>;

class EmbedError : public std::runtime_error {
 public:
  explicit EmbedError(const std::string& message)
      : std::runtime_error(message) {}
};

// Embedding model behind a provider contract so the real service and the
// deterministic test embedder are interchangeable.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const = 0;
  // Stable identifier stamped into persisted stores (model name for real
  // providers) so a store is never silently mixed across providers.
  virtual std::string id() const = 0;
  // Longest input honored; embed_text truncates to this before the call.
  virtual std::size_t max_input_bytes() const { return 16384; }
  // One vector per input text, same order. Throws EmbedError on transport
  // or provider failure.
  virtual std::vector<Vector> embed_batch(
      const std::vector<std::string>& texts) = 0;
};

inline constexpr std::size_t kDeterministicDimension = 256;

// Reference test embedder, reproducible bit-for-bit across platforms:
//   1. lowercase the input (ASCII);
//   2. tokenize into maximal [a-z0-9] runs;
//   3. features are "w:<word>" per token plus "t:<trigram>" for every
//      3-character window of each token of length >= 3;
//   4. each feature adds +-1 to bucket fnv1a64(feature) % 256, where the
//      sign is -1 when fnv1a64(feature + "#") has its low bit set;
//   5. L2-normalize the resulting counts.
// Empty or token-free text yields the zero vector.
Vector deterministic_embed(std::string_view text);

class DeterministicProvider : public EmbeddingProvider {
 public:
  std::size_t dimension() const override { return kDeterministicDimension; }
  std::string id() const override { return "deterministic-v1"; }
  std::vector<Vector> embed_batch(
      const std::vector<std::string>& texts) override;
};

// dot(a,b) / (|a||b|); a zero-vector operand makes the score 0.
// Throws EmbedError on dimension mismatch.
double cosine(const Vector& a, const Vector& b);

// In-place L2 normalization; the zero vector is left unchanged.
void l2_normalize(Vector& v);

// Trims, rejects empty text, truncates to the provider's input limit,
// embeds, and normalizes.
Vector embed_text(EmbeddingProvider& provider, const std::string& text);

}  // namespace nl2kql::embed

#endif  // NL2KQL_EMBED_HPP_
