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
#include "nl2kql/vector_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nl2kql::embed {
namespace {

constexpr char kMagic[] = "nl2kql-vectors";
constexpr int kFormatVersion = 1;
constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::string& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    const std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                            (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                            static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(kBase64Alphabet[(n >> 18) & 63]);
    out.push_back(kBase64Alphabet[(n >> 12) & 63]);
    out.push_back(kBase64Alphabet[(n >> 6) & 63]);
    out.push_back(kBase64Alphabet[n & 63]);
    i += 3;
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
    out.push_back(kBase64Alphabet[(n >> 18) & 63]);
    out.push_back(kBase64Alphabet[(n >> 12) & 63]);
    out.append("==");
  } else if (rest == 2) {
    const std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                            (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out.push_back(kBase64Alphabet[(n >> 18) & 63]);
    out.push_back(kBase64Alphabet[(n >> 12) & 63]);
    out.push_back(kBase64Alphabet[(n >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

bool base64_decode(const std::string& text, std::string& bytes) {
  if (text.size() % 4 != 0) return false;
  int values[4];
  bytes.clear();
  bytes.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int pad = 0;
    for (int j = 0; j < 4; ++j) {
      const char c = text[i + j];
      if (c == '=') {
        // Padding is legal only in the last two positions of the last group.
        if (i + 4 != text.size() || j < 2) return false;
        values[j] = 0;
        ++pad;
        continue;
      }
      if (pad > 0) return false;  // data after padding
      const char* pos = std::strchr(kBase64Alphabet, c);
      if (pos == nullptr || c == '\0') return false;
      values[j] = static_cast<int>(pos - kBase64Alphabet);
    }
    const std::uint32_t n = (values[0] << 18) | (values[1] << 12) |
                            (values[2] << 6) | values[3];
    bytes.push_back(static_cast<char>((n >> 16) & 0xff));
    if (pad < 2) bytes.push_back(static_cast<char>((n >> 8) & 0xff));
    if (pad < 1) bytes.push_back(static_cast<char>(n & 0xff));
  }
  return true;
}

std::string encode_vector(const Vector& v) {
  std::string bytes;
  bytes.reserve(v.size() * 4);
  for (float f : v) {
    std::uint32_t u = 0;
    std::memcpy(&u, &f, sizeof u);
    bytes.push_back(static_cast<char>(u & 0xff));
    bytes.push_back(static_cast<char>((u >> 8) & 0xff));
    bytes.push_back(static_cast<char>((u >> 16) & 0xff));
    bytes.push_back(static_cast<char>((u >> 24) & 0xff));
  }
  return base64_encode(bytes);
}

bool decode_vector(const std::string& text, std::size_t dimension, Vector& v) {
  std::string bytes;
  if (!base64_decode(text, bytes)) return false;
  if (bytes.size() != dimension * 4) return false;
  v.assign(dimension, 0.0f);
  for (std::size_t i = 0; i < dimension; ++i) {
    const std::uint32_t u =
        static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i])) |
        (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + 1])) << 8) |
        (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + 2])) << 16) |
        (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + 3])) << 24);
    float f = 0.0f;
    std::memcpy(&f, &u, sizeof f);
    v[i] = f;
  }
  return true;
}

std::string escape_field(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

bool unescape_field(const std::string& text, std::string& out) {
  out.clear();
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (i + 1 >= text.size()) return false;
    switch (text[++i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: return false;
    }
  }
  return true;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

std::string payload_kind_name(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::Table: return "table";
    case PayloadKind::Value: return "value";
    case PayloadKind::Column: return "column";
    case PayloadKind::Fewshot: return "fewshot";
  }
  return "table";
}

std::optional<PayloadKind> parse_payload_kind(const std::string& name) {
  if (name == "table") return PayloadKind::Table;
  if (name == "value") return PayloadKind::Value;
  if (name == "column") return PayloadKind::Column;
  if (name == "fewshot") return PayloadKind::Fewshot;
  return std::nullopt;
}

std::string table_key(const std::string& table) { return "table:" + table; }

std::string value_key(const std::string& table, const std::string& column,
                      const std::string& value) {
  return "value:" + table + "." + column + "=" + value;
}

std::string column_key(const std::string& table, const std::string& column) {
  return "column:" + table + "." + column;
}

std::string fewshot_key(std::size_t index) {
  return "fewshot:" + std::to_string(index);
}

VectorStore::VectorStore(std::size_t dimension, std::string provider_id)
    : dimension_(dimension), provider_id_(std::move(provider_id)) {
  if (dimension_ == 0) throw EmbedError("vector store: dimension must be positive");
  if (provider_id_.empty() ||
      provider_id_.find_first_of(" \t\r\n") != std::string::npos) {
    throw EmbedError("vector store: provider id must be a non-empty token");
  }
}

void VectorStore::add(const std::string& key, PayloadKind kind,
                      const std::string& payload, Vector vector) {
  if (key.empty()) throw EmbedError("vector store: empty key");
  if (vector.size() != dimension_) {
    throw EmbedError("vector store: '" + key + "' has dimension " +
                     std::to_string(vector.size()) + ", store expects " +
                     std::to_string(dimension_));
  }
  for (float x : vector) {
    if (!std::isfinite(x)) {
      throw EmbedError("vector store: '" + key + "' has a non-finite component");
    }
  }
  l2_normalize(vector);
  StoreEntry entry{key, kind, payload, std::move(vector)};
  if (!entries_.emplace(key, std::move(entry)).second) {
    throw EmbedError("vector store: duplicate key '" + key + "'");
  }
}

const StoreEntry* VectorStore::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string, double>> VectorStore::top_k(
    const Vector& query, std::size_t k, std::optional<PayloadKind> kind_filter,
    const PayloadFilter& payload_filter) const {
  std::vector<std::pair<std::string, double>> scored;
  if (k == 0) return scored;
  for (const auto& [key, entry] : entries_) {
    if (kind_filter && entry.kind != *kind_filter) continue;
    if (payload_filter && !payload_filter(entry)) continue;
    scored.emplace_back(key, cosine(query, entry.vector));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

void VectorStore::for_each(
    const std::function<void(const StoreEntry&)>& fn) const {
  for (const auto& [key, entry] : entries_) fn(entry);
}

void VectorStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EmbedError("vector store: cannot write '" + path + "'");
  out << kMagic << ' ' << kFormatVersion << ' ' << dimension_ << ' '
      << provider_id_ << ' ' << entries_.size() << '\n';
  for (const auto& [key, entry] : entries_) {
    out << escape_field(key) << '\t' << payload_kind_name(entry.kind) << '\t'
        << escape_field(entry.payload) << '\t' << encode_vector(entry.vector)
        << '\n';
  }
  out.flush();
  if (!out) throw EmbedError("vector store: write to '" + path + "' failed");
}

VectorStore VectorStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmbedError("vector store: cannot read '" + path + "'");
  auto fail = [&path](std::size_t line, const std::string& what) -> EmbedError {
    return EmbedError("vector store: " + path + ":" + std::to_string(line) +
                      ": " + what);
  };

  std::string header;
  if (!std::getline(in, header)) throw fail(1, "missing header");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::istringstream hs(header);
  std::string magic, provider;
  int version = 0;
  std::size_t dimension = 0, count = 0;
  if (!(hs >> magic >> version >> dimension >> provider >> count) ||
      magic != kMagic) {
    throw fail(1, "malformed header");
  }
  if (version != kFormatVersion) {
    throw fail(1, "unsupported format version " + std::to_string(version));
  }

  VectorStore store(dimension, provider);
  std::string line;
  for (std::size_t record = 0; record < count; ++record) {
    const std::size_t line_no = record + 2;
    if (!std::getline(in, line)) throw fail(line_no, "missing record");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != 4) {
      throw fail(line_no, "expected 4 tab-separated fields, got " +
                              std::to_string(fields.size()));
    }
    std::string key, payload;
    if (!unescape_field(fields[0], key) || key.empty()) {
      throw fail(line_no, "bad key");
    }
    const std::optional<PayloadKind> kind = parse_payload_kind(fields[1]);
    if (!kind) throw fail(line_no, "unknown payload kind '" + fields[1] + "'");
    if (!unescape_field(fields[2], payload)) throw fail(line_no, "bad payload");
    Vector vector;
    if (!decode_vector(fields[3], dimension, vector)) {
      throw fail(line_no, "bad vector encoding");
    }
    for (float x : vector) {
      if (!std::isfinite(x)) throw fail(line_no, "non-finite vector component");
    }
    // Insert without re-normalizing so the round trip is bit-exact.
    StoreEntry entry{key, *kind, payload, std::move(vector)};
    if (!store.entries_.emplace(key, std::move(entry)).second) {
      throw fail(line_no, "duplicate key '" + key + "'");
    }
  }
  return store;
}

}  // namespace nl2kql::embed
