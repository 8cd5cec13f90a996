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
#include "nl2kql/cell.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

namespace nl2kql::engine {

namespace {

constexpr std::int64_t kMicrosPerSecond = 1000000;
constexpr std::int64_t kMicrosPerDay = 86400 * kMicrosPerSecond;

std::string double_text(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "0";
  std::string out(buf, end);
  if (out == "-0") out = "0";
  return out;
}

void json_escape(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yy + (m <= 2));
}

bool parse_uint(std::string_view text, std::size_t& pos, unsigned digits,
                unsigned& out) {
  if (pos + digits > text.size()) return false;
  unsigned value = 0;
  for (unsigned k = 0; k < digits; ++k) {
    char c = text[pos + k];
    if (c < '0' || c > '9') return false;
    value = value * 10 + static_cast<unsigned>(c - '0');
  }
  pos += digits;
  out = value;
  return true;
}

}  // namespace

std::string DynamicNode::canonical_text() const {
  std::string out;
  switch (kind) {
    case Kind::Null:
      return "null";
    case Kind::Bool:
      return b ? "true" : "false";
    case Kind::Long:
      return std::to_string(i);
    case Kind::Double:
      return double_text(d);
    case Kind::String:
      json_escape(out, s);
      return out;
    case Kind::Array: {
      out = "[";
      for (std::size_t k = 0; k < array.size(); ++k) {
        if (k) out += ",";
        out += array[k].canonical_text();
      }
      out += "]";
      return out;
    }
    case Kind::Object: {
      out = "{";
      for (std::size_t k = 0; k < object.size(); ++k) {
        if (k) out += ",";
        json_escape(out, object[k].first);
        out += ":";
        out += object[k].second.canonical_text();
      }
      out += "}";
      return out;
    }
  }
  return out;
}

const DynamicNode* DynamicNode::find(std::string_view key) const {
  if (kind != Kind::Object) return nullptr;
  for (const auto& [k, v] : object) {
    if (k == key) return &v;
  }
  return nullptr;
}

bool DynamicNode::operator==(const DynamicNode& other) const {
  // Numeric kinds compare by value so 1 and 1.0 are the same element.
  if ((kind == Kind::Long || kind == Kind::Double) &&
      (other.kind == Kind::Long || other.kind == Kind::Double)) {
    double lhs = kind == Kind::Long ? static_cast<double>(i) : d;
    double rhs = other.kind == Kind::Long ? static_cast<double>(other.i) : other.d;
    return lhs == rhs;
  }
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::Null: return true;
    case Kind::Bool: return b == other.b;
    case Kind::Long: return i == other.i;
    case Kind::Double: return d == other.d;
    case Kind::String: return s == other.s;
    case Kind::Array: return array == other.array;
    case Kind::Object: return object == other.object;
  }
  return false;
}

CellValue CellValue::from_string(std::string v) {
  CellValue c;
  c.type = Type::String;
  c.s = std::move(v);
  return c;
}

CellValue CellValue::from_long(std::int64_t v) {
  CellValue c;
  c.type = Type::Long;
  c.i = v;
  return c;
}

CellValue CellValue::from_double(double v) {
  CellValue c;
  c.type = Type::Double;
  c.d = v;
  return c;
}

CellValue CellValue::from_bool(bool v) {
  CellValue c;
  c.type = Type::Bool;
  c.b = v;
  return c;
}

CellValue CellValue::datetime(std::int64_t micros) {
  CellValue c;
  c.type = Type::DateTime;
  c.i = micros;
  return c;
}

CellValue CellValue::timespan(std::int64_t micros) {
  CellValue c;
  c.type = Type::Timespan;
  c.i = micros;
  return c;
}

CellValue CellValue::dynamic(DynamicNode node) {
  CellValue c;
  c.type = Type::Dynamic;
  c.dyn = std::make_shared<const DynamicNode>(std::move(node));
  return c;
}

std::string CellValue::canonical_text() const {
  switch (type) {
    case Type::Null:
      return "null";
    case Type::String:
      return "str:" + s;
    case Type::Long:
      return "num:" + std::to_string(i);
    case Type::Double: {
      // Integral doubles share the representation of equal longs so that
      // 2.0 and 2 form one group key.
      double rounded = static_cast<double>(static_cast<std::int64_t>(d));
      if (rounded == d && d >= -9.2e18 && d <= 9.2e18) {
        return "num:" + std::to_string(static_cast<std::int64_t>(d));
      }
      return "num:" + double_text(d);
    }
    case Type::Bool:
      return b ? "bool:true" : "bool:false";
    case Type::DateTime:
      return "dt:" + format_datetime_micros(i);
    case Type::Timespan:
      return "ts:" + std::to_string(i);
    case Type::Dynamic:
      return "dyn:" + (dyn ? dyn->canonical_text() : "null");
  }
  return "null";
}

std::optional<int> compare_cells(const CellValue& a, const CellValue& b) {
  if (a.is_numeric() && b.is_numeric()) {
    if (a.type == CellValue::Type::Long && b.type == CellValue::Type::Long) {
      return a.i < b.i ? -1 : a.i > b.i ? 1 : 0;
    }
    double x = a.as_double();
    double y = b.as_double();
    return x < y ? -1 : x > y ? 1 : 0;
  }
  if (a.type != b.type) return std::nullopt;
  switch (a.type) {
    case CellValue::Type::String:
      return a.s < b.s ? -1 : a.s > b.s ? 1 : 0;
    case CellValue::Type::Bool:
      return a.b == b.b ? 0 : (a.b ? 1 : -1);
    case CellValue::Type::DateTime:
    case CellValue::Type::Timespan:
      return a.i < b.i ? -1 : a.i > b.i ? 1 : 0;
    default:
      return std::nullopt;  // dynamic has equality, not order
  }
}

std::optional<bool> cells_equal(const CellValue& a, const CellValue& b) {
  if (a.type == CellValue::Type::Dynamic || b.type == CellValue::Type::Dynamic) {
    if (a.type != b.type) return std::nullopt;
    if (!a.dyn || !b.dyn) return a.dyn == b.dyn;
    return *a.dyn == *b.dyn;
  }
  auto cmp = compare_cells(a, b);
  if (!cmp) return std::nullopt;
  return *cmp == 0;
}

std::optional<std::int64_t> parse_datetime_micros(std::string_view text) {
  std::size_t pos = 0;
  unsigned year = 0, month = 0, day = 0;
  if (!parse_uint(text, pos, 4, year)) return std::nullopt;
  if (pos >= text.size() || text[pos] != '-') return std::nullopt;
  ++pos;
  if (!parse_uint(text, pos, 2, month)) return std::nullopt;
  if (pos >= text.size() || text[pos] != '-') return std::nullopt;
  ++pos;
  if (!parse_uint(text, pos, 2, day)) return std::nullopt;
  if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;

  std::int64_t micros =
      days_from_civil(static_cast<int>(year), month, day) * kMicrosPerDay;

  if (pos == text.size()) return micros;
  if (text[pos] != 'T' && text[pos] != ' ') return std::nullopt;
  ++pos;

  unsigned hour = 0, minute = 0, second = 0;
  if (!parse_uint(text, pos, 2, hour)) return std::nullopt;
  if (pos >= text.size() || text[pos] != ':') return std::nullopt;
  ++pos;
  if (!parse_uint(text, pos, 2, minute)) return std::nullopt;
  if (pos < text.size() && text[pos] == ':') {
    ++pos;
    if (!parse_uint(text, pos, 2, second)) return std::nullopt;
  }
  if (hour > 23 || minute > 59 || second > 59) return std::nullopt;
  micros += (hour * 3600LL + minute * 60LL + second) * kMicrosPerSecond;

  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::int64_t frac = 0;
    int digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 6) frac = frac * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (int k = digits; k < 6; ++k) frac *= 10;
    micros += frac;
  }
  if (pos < text.size() && text[pos] == 'Z') ++pos;
  if (pos != text.size()) return std::nullopt;
  return micros;
}

std::optional<std::int64_t> parse_timespan_micros(std::string_view text) {
  std::size_t unit_pos = text.size();
  while (unit_pos > 0) {
    char c = text[unit_pos - 1];
    if (c >= '0' && c <= '9') break;
    --unit_pos;
  }
  std::string_view number = text.substr(0, unit_pos);
  std::string_view unit = text.substr(unit_pos);
  if (number.empty() || unit.empty()) return std::nullopt;

  std::int64_t scale;
  if (unit == "d") scale = kMicrosPerDay;
  else if (unit == "h") scale = 3600 * kMicrosPerSecond;
  else if (unit == "m") scale = 60 * kMicrosPerSecond;
  else if (unit == "s") scale = kMicrosPerSecond;
  else if (unit == "ms") scale = 1000;
  else return std::nullopt;

  std::string number_text(number);
  char* end = nullptr;
  double value = std::strtod(number_text.c_str(), &end);
  if (end != number_text.c_str() + number_text.size()) return std::nullopt;
  return static_cast<std::int64_t>(value * static_cast<double>(scale));
}

std::string format_datetime_micros(std::int64_t micros) {
  std::int64_t days = micros / kMicrosPerDay;
  std::int64_t rem = micros % kMicrosPerDay;
  if (rem < 0) {
    rem += kMicrosPerDay;
    --days;
  }
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  unsigned hour = static_cast<unsigned>(rem / (3600 * kMicrosPerSecond));
  rem %= 3600 * kMicrosPerSecond;
  unsigned minute = static_cast<unsigned>(rem / (60 * kMicrosPerSecond));
  rem %= 60 * kMicrosPerSecond;
  unsigned second = static_cast<unsigned>(rem / kMicrosPerSecond);
  unsigned frac = static_cast<unsigned>(rem % kMicrosPerSecond);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02u:%02u:%02u.%06uZ", y, m,
                d, hour, minute, second, frac);
  return buf;
}

}  // namespace nl2kql::engine
