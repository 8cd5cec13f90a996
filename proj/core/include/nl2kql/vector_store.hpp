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
#ifndef NL2KQL_VECTOR_STORE_HPP_
#define NL2KQL_VECTOR_STORE_HPP_

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nl2kql/embed.hpp"

namespace nl2kql::embed {

enum class PayloadKind { Table, Value, Column, Fewshot };

std::string payload_kind_name(PayloadKind kind);
std::optional<PayloadKind> parse_payload_kind(const std::string& name);

// Key conventions shared by every store producer and consumer.
std::string table_key(const std::string& table);
std::string value_key(const std::string& table, const std::string& column,
                      const std::string& value);
std::string column_key(const std::string& table, const std::string& column);
std::string fewshot_key(std::size_t index);

struct StoreEntry {
  std::string key;
  PayloadKind kind = PayloadKind::Table;
  std::string payload;  // the text this entry was embedded from
  Vector vector;        // L2-normalized (or zero)
};

// Flat cosine-similarity index over catalog elements and few-shot examples.
// Immutable once built; queries are safe to run concurrently.
class VectorStore {
 public:
  explicit VectorStore(std::size_t dimension, std::string provider_id);

  // Normalizes and stores. Throws EmbedError on an empty or duplicate key,
  // dimension mismatch, or a non-finite component.
  void add(const std::string& key, PayloadKind kind, const std::string& payload,
           Vector vector);

  const StoreEntry* find(const std::string& key) const;
  std::size_t size() const { return entries_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::string& provider_id() const { return provider_id_; }

  using PayloadFilter = std::function<bool(const StoreEntry&)>;

  // Entries passing both filters ranked by (cosine score desc, key asc),
  // truncated to k. Fewer than k matches returns all of them.
  std::vector<std::pair<std::string, double>> top_k(
      const Vector& query, std::size_t k,
      std::optional<PayloadKind> kind_filter = std::nullopt,
      const PayloadFilter& payload_filter = nullptr) const;

  // Walk entries in key order.
  void for_each(const std::function<void(const StoreEntry&)>& fn) const;

  // Text file: "nl2kql-vectors 1 <dim> <provider> <count>" header, then one
  // tab-separated record per entry: key, kind, payload, base64 of the
  // little-endian float32 vector. Tabs, newlines, and backslashes inside
  // key/payload are backslash-escaped. Load does not re-normalize, so a
  // save/load round trip reproduces vectors bit for bit.
  void save(const std::string& path) const;
  static VectorStore load(const std::string& path);

 private:
  std::size_t dimension_;
  std::string provider_id_;
  std::map<std::string, StoreEntry> entries_;
};

}  // namespace nl2kql::embed

#endif  // NL2KQL_VECTOR_STORE_HPP_
