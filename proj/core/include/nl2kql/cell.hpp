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
#ifndef NL2KQL_CELL_HPP_
#define NL2KQL_CELL_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nl2kql::engine {

// Canonical tree for dynamic cells. Object keys are kept sorted so equality
// and canonical text are independent of construction order.
struct DynamicNode {
  enum class Kind { Null, Bool, Long, Double, String, Array, Object };
  Kind kind = Kind::Null;
  bool b = false;
  std::int64_t i = 0;
  double d = 0.0;
  std::string s;
  std::vector<DynamicNode> array;
  std::vector<std::pair<std::string, DynamicNode>> object;  // sorted by key

  // Compact JSON with sorted keys; doubles in shortest round-trip form.
  std::string canonical_text() const;
  const DynamicNode* find(std::string_view key) const;
  bool operator==(const DynamicNode& other) const;
};

// One typed value. DateTime is UTC microseconds since the Unix epoch,
// Timespan is signed microseconds.
struct CellValue {
  enum class Type { Null, String, Long, Double, Bool, DateTime, Timespan, Dynamic };

  Type type = Type::Null;
  std::string s;
  std::int64_t i = 0;  // Long, DateTime, Timespan
  double d = 0.0;
  bool b = false;
  std::shared_ptr<const DynamicNode> dyn;

  static CellValue null() { return {}; }
  static CellValue from_string(std::string v);
  static CellValue from_long(std::int64_t v);
  static CellValue from_double(double v);
  static CellValue from_bool(bool v);
  static CellValue datetime(std::int64_t micros);
  static CellValue timespan(std::int64_t micros);
  static CellValue dynamic(DynamicNode node);

  bool is_null() const { return type == Type::Null; }
  bool is_numeric() const { return type == Type::Long || type == Type::Double; }
  double as_double() const { return type == Type::Long ? static_cast<double>(i) : d; }

  // Type-tagged text, unique per value; used for row signatures, group keys,
  // and join keys. Datetimes format as ISO-8601 UTC with microseconds.
  std::string canonical_text() const;
};

// Three-way comparison. nullopt means the types are not comparable (string
// vs number, dynamic ordering); the caller turns that into a typed error.
// Null cells are the caller's business and never reach here.
std::optional<int> compare_cells(const CellValue& a, const CellValue& b);

// Equality including deep dynamic comparison. nullopt for incomparable types.
std::optional<bool> cells_equal(const CellValue& a, const CellValue& b);

// "2024-01-31", "2024-01-31 13:30:00", or "2024-01-31T13:30:00.250Z".
std::optional<std::int64_t> parse_datetime_micros(std::string_view text);
// Timespan literal body: "7d", "1.5h", "30m", "10s", "100ms".
std::optional<std::int64_t> parse_timespan_micros(std::string_view text);
std::string format_datetime_micros(std::int64_t micros);

}  // namespace nl2kql::engine

#endif  // NL2KQL_CELL_HPP_
