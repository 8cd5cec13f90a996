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
#include "nl2kql/engine.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <unordered_map>
#include <unordered_set>

#include "nl2kql/analysis.hpp"

namespace nl2kql::engine {

using kql::Expr;
using kql::ExprKind;
using kql::LiteralKind;
using kql::NamedExpr;
using kql::PipeStage;
using kql::Query;
using kql::StageKind;
using kql::TableExprKind;
using kql::TableExpression;

namespace {

constexpr char kSep = '\x1f';
constexpr std::size_t kMaxRangeRows = 1 << 20;

[[noreturn]] void fail(const std::string& message) {
  throw ExecutionError(message);
}

std::string type_name(CellValue::Type t) {
  switch (t) {
    case CellValue::Type::Null: return "null";
    case CellValue::Type::String: return "string";
    case CellValue::Type::Long: return "long";
    case CellValue::Type::Double: return "real";
    case CellValue::Type::Bool: return "bool";
    case CellValue::Type::DateTime: return "datetime";
    case CellValue::Type::Timespan: return "timespan";
    case CellValue::Type::Dynamic: return "dynamic";
  }
  return "?";
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// KQL `has`: the term appears delimited by non-alphanumeric boundaries,
// case-insensitively.
bool has_term(std::string_view haystack, std::string_view term) {
  if (term.empty()) return false;
  std::string h = lower(haystack);
  std::string t = lower(term);
  std::size_t pos = 0;
  while ((pos = h.find(t, pos)) != std::string::npos) {
    bool left_ok =
        pos == 0 || !std::isalnum(static_cast<unsigned char>(h[pos - 1]));
    std::size_t end = pos + t.size();
    bool right_ok =
        end == h.size() || !std::isalnum(static_cast<unsigned char>(h[end]));
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

CellValue lift_dynamic(const DynamicNode& node) {
  switch (node.kind) {
    case DynamicNode::Kind::Null: return CellValue::null();
    case DynamicNode::Kind::Bool: return CellValue::from_bool(node.b);
    case DynamicNode::Kind::Long: return CellValue::from_long(node.i);
    case DynamicNode::Kind::Double: return CellValue::from_double(node.d);
    case DynamicNode::Kind::String: return CellValue::from_string(node.s);
    case DynamicNode::Kind::Array:
    case DynamicNode::Kind::Object: return CellValue::dynamic(node);
  }
  return CellValue::null();
}

std::string plain_text(const CellValue& cell) {
  switch (cell.type) {
    case CellValue::Type::Null: return "";
    case CellValue::Type::String: return cell.s;
    case CellValue::Type::Long: return std::to_string(cell.i);
    case CellValue::Type::Double: {
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), cell.d);
      return std::string(buf, ec == std::errc() ? end : buf);
    }
    case CellValue::Type::Bool: return cell.b ? "true" : "false";
    case CellValue::Type::DateTime: return format_datetime_micros(cell.i);
    case CellValue::Type::Timespan: return std::to_string(cell.i);
    case CellValue::Type::Dynamic:
      return cell.dyn ? cell.dyn->canonical_text() : "null";
  }
  return "";
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct Env {
  std::unordered_map<std::string, CellValue> scalars;
  std::unordered_map<std::string, ResultTable> tables;
};

class Executor {
 public:
  explicit Executor(const Database& db) : db_(db) {}

  ResultTable run(const Query& query, Env env) {
    for (const auto& let : query.lets) {
      if (let.subquery) {
        env.tables[let.name] = run(*let.subquery, env);
      } else if (let.value) {
        env.scalars[let.name] = eval_scalar(*let.value, env);
      }
    }
    ResultTable table = resolve_source(query.source.get(), env);
    bool serialized = false;
    for (const auto& stage : query.stages) {
      table = apply_stage(stage, std::move(table), env, serialized);
    }
    return table;
  }

 private:
  // ---- evaluation context ---------------------------------------------

  struct RowCtx {
    const std::vector<std::string>* columns = nullptr;
    const std::vector<CellValue>* row = nullptr;
    std::size_t row_index = 0;
    bool serialized = false;
    const Env* env = nullptr;
    // Precomputed aggregate results, keyed by expression node.
    const std::map<const Expr*, CellValue>* overrides = nullptr;
  };

  CellValue eval_scalar(const Expr& e, const Env& env) {
    RowCtx ctx;
    ctx.env = &env;
    return eval(&e, ctx);
  }

  CellValue eval(const Expr* e, const RowCtx& ctx) {
    if (e == nullptr) fail("missing expression");
    if (ctx.overrides) {
      auto it = ctx.overrides->find(e);
      if (it != ctx.overrides->end()) return it->second;
    }
    switch (e->kind) {
      case ExprKind::ColumnRef: return eval_column(*e, ctx);
      case ExprKind::Literal: return eval_literal(*e);
      case ExprKind::Unary: return eval_unary(*e, ctx);
      case ExprKind::Binary: return eval_binary(*e, ctx);
      case ExprKind::Between: return eval_between(*e, ctx);
      case ExprKind::Case: return eval_case(*e, ctx);
      case ExprKind::FunctionCall: return eval_call(*e, ctx);
      case ExprKind::PropertyAccess: return eval_property(*e, ctx);
      case ExprKind::List: fail("value list outside an operator");
      case ExprKind::Subquery: {
        if (!e->subquery) fail("empty subquery");
        ResultTable sub = run(*e->subquery, ctx.env ? *ctx.env : Env{});
        if (sub.rows.empty() || sub.columns.empty()) return CellValue::null();
        return sub.rows[0][0];
      }
    }
    fail("unsupported expression");
  }

  CellValue eval_column(const Expr& e, const RowCtx& ctx) {
    if (ctx.columns && ctx.row) {
      for (std::size_t i = 0; i < ctx.columns->size(); ++i) {
        if ((*ctx.columns)[i] == e.name) return (*ctx.row)[i];
      }
    }
    if (ctx.env) {
      auto it = ctx.env->scalars.find(e.name);
      if (it != ctx.env->scalars.end()) return it->second;
    }
    fail("unknown identifier '" + e.name + "'");
  }

  CellValue eval_literal(const Expr& e) {
    switch (e.literal_kind) {
      case LiteralKind::String:
        return CellValue::from_string(e.string_value);
      case LiteralKind::Number: {
        const std::string& t = e.literal_text;
        if (t.find('.') != std::string::npos ||
            t.find('e') != std::string::npos ||
            t.find('E') != std::string::npos) {
          return CellValue::from_double(std::strtod(t.c_str(), nullptr));
        }
        std::int64_t value = 0;
        std::from_chars(t.data(), t.data() + t.size(), value);
        return CellValue::from_long(value);
      }
      case LiteralKind::Bool:
        return CellValue::from_bool(e.literal_text == "true");
      case LiteralKind::DateTime: {
        // literal_text is `datetime(<body>)`
        std::string_view body(e.literal_text);
        body.remove_prefix(9);
        body.remove_suffix(1);
        auto micros = parse_datetime_micros(body);
        if (!micros) fail("bad datetime literal " + e.literal_text);
        return CellValue::datetime(*micros);
      }
      case LiteralKind::Timespan: {
        auto micros = parse_timespan_micros(e.literal_text);
        if (!micros) fail("bad timespan literal " + e.literal_text);
        return CellValue::timespan(*micros);
      }
    }
    fail("bad literal");
  }

  CellValue eval_unary(const Expr& e, const RowCtx& ctx) {
    CellValue v = eval(e.args.empty() ? nullptr : e.args[0].get(), ctx);
    if (v.is_null()) return v;
    switch (v.type) {
      case CellValue::Type::Long: return CellValue::from_long(-v.i);
      case CellValue::Type::Double: return CellValue::from_double(-v.d);
      case CellValue::Type::Timespan: return CellValue::timespan(-v.i);
      default: fail("cannot negate " + type_name(v.type));
    }
  }

  bool truthy(const CellValue& v) {
    if (v.is_null()) return false;
    if (v.type != CellValue::Type::Bool) {
      fail("predicate must be bool, got " + type_name(v.type));
    }
    return v.b;
  }

  CellValue eval_binary(const Expr& e, const RowCtx& ctx) {
    const std::string& op = e.name;
    const Expr* lhs_expr = e.args.size() > 0 ? e.args[0].get() : nullptr;
    const Expr* rhs_expr = e.args.size() > 1 ? e.args[1].get() : nullptr;

    if (op == "and") {
      if (!truthy(eval(lhs_expr, ctx))) return CellValue::from_bool(false);
      return CellValue::from_bool(truthy(eval(rhs_expr, ctx)));
    }
    if (op == "or") {
      if (truthy(eval(lhs_expr, ctx))) return CellValue::from_bool(true);
      return CellValue::from_bool(truthy(eval(rhs_expr, ctx)));
    }

    CellValue lhs = eval(lhs_expr, ctx);

    if (op == "in" || op == "in~" || op == "has_any" || op == "has_all") {
      if (rhs_expr == nullptr || rhs_expr->kind != ExprKind::List) {
        fail("'" + op + "' needs a value list");
      }
      return eval_list_op(op, lhs, *rhs_expr, ctx);
    }

    CellValue rhs = eval(rhs_expr, ctx);

    if (op == "==" || op == "!=") {
      if (lhs.is_null() || rhs.is_null()) return CellValue::from_bool(false);
      auto equal = cells_equal(lhs, rhs);
      if (!equal) {
        fail("cannot compare " + type_name(lhs.type) + " with " +
             type_name(rhs.type));
      }
      return CellValue::from_bool(op == "==" ? *equal : !*equal);
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      if (lhs.is_null() || rhs.is_null()) return CellValue::from_bool(false);
      auto cmp = compare_cells(lhs, rhs);
      if (!cmp) {
        fail("cannot order " + type_name(lhs.type) + " against " +
             type_name(rhs.type));
      }
      bool r = op == "<"    ? *cmp < 0
               : op == "<=" ? *cmp <= 0
               : op == ">"  ? *cmp > 0
                            : *cmp >= 0;
      return CellValue::from_bool(r);
    }
    if (op == "contains" || op == "!contains") {
      if (lhs.is_null() || rhs.is_null()) return CellValue::from_bool(false);
      bool found =
          lower(to_text(lhs)).find(lower(to_text(rhs))) != std::string::npos;
      return CellValue::from_bool(op[0] == '!' ? !found : found);
    }
    if (op == "has") {
      if (lhs.is_null() || rhs.is_null()) return CellValue::from_bool(false);
      return CellValue::from_bool(has_term(to_text(lhs), to_text(rhs)));
    }
    if (op == "matches regex") {
      if (lhs.is_null() || rhs.is_null()) return CellValue::from_bool(false);
      try {
        std::regex re(to_text(rhs));
        return CellValue::from_bool(std::regex_search(to_text(lhs), re));
      } catch (const std::regex_error&) {
        fail("bad regular expression '" + to_text(rhs) + "'");
      }
    }
    if (op == "+" || op == "-" || op == "*" || op == "/") {
      return eval_arithmetic(op[0], lhs, rhs);
    }
    fail("unsupported operator '" + op + "'");
  }

  // String view of a cell for the text operators; dynamic uses its JSON text.
  std::string to_text(const CellValue& v) {
    if (v.type == CellValue::Type::String) return v.s;
    if (v.type == CellValue::Type::Dynamic) return plain_text(v);
    fail("expected a string, got " + type_name(v.type));
  }

  CellValue eval_list_op(const std::string& op, const CellValue& lhs,
                         const Expr& list, const RowCtx& ctx) {
    if (lhs.is_null()) return CellValue::from_bool(false);
    if (op == "in" || op == "in~") {
      for (const auto& item : list.args) {
        CellValue v = eval(item.get(), ctx);
        if (v.is_null()) continue;
        if (op == "in~") {
          if (lower(to_text(lhs)) == lower(to_text(v))) {
            return CellValue::from_bool(true);
          }
        } else {
          auto equal = cells_equal(lhs, v);
          if (equal && *equal) return CellValue::from_bool(true);
        }
      }
      return CellValue::from_bool(false);
    }
    // has_any / has_all
    bool all = op == "has_all";
    for (const auto& item : list.args) {
      CellValue v = eval(item.get(), ctx);
      bool hit = !v.is_null() && has_term(to_text(lhs), to_text(v));
      if (all && !hit) return CellValue::from_bool(false);
      if (!all && hit) return CellValue::from_bool(true);
    }
    return CellValue::from_bool(all);
  }

  CellValue eval_arithmetic(char op, const CellValue& lhs,
                            const CellValue& rhs) {
    if (lhs.is_null() || rhs.is_null()) return CellValue::null();

    if (lhs.type == CellValue::Type::String &&
        rhs.type == CellValue::Type::String && op == '+') {
      return CellValue::from_string(lhs.s + rhs.s);
    }

    using T = CellValue::Type;
    // datetime/timespan algebra
    if (lhs.type == T::DateTime && rhs.type == T::Timespan) {
      if (op == '+') return CellValue::datetime(lhs.i + rhs.i);
      if (op == '-') return CellValue::datetime(lhs.i - rhs.i);
    }
    if (lhs.type == T::Timespan && rhs.type == T::DateTime && op == '+') {
      return CellValue::datetime(lhs.i + rhs.i);
    }
    if (lhs.type == T::DateTime && rhs.type == T::DateTime && op == '-') {
      return CellValue::timespan(lhs.i - rhs.i);
    }
    if (lhs.type == T::Timespan && rhs.type == T::Timespan) {
      if (op == '+') return CellValue::timespan(lhs.i + rhs.i);
      if (op == '-') return CellValue::timespan(lhs.i - rhs.i);
      if (op == '/') {
        if (rhs.i == 0) fail("division by zero");
        return CellValue::from_double(static_cast<double>(lhs.i) /
                                      static_cast<double>(rhs.i));
      }
    }
    if (lhs.type == T::Timespan && rhs.is_numeric()) {
      double factor = rhs.as_double();
      if (op == '*') {
        return CellValue::timespan(
            static_cast<std::int64_t>(static_cast<double>(lhs.i) * factor));
      }
      if (op == '/') {
        if (factor == 0) fail("division by zero");
        return CellValue::timespan(
            static_cast<std::int64_t>(static_cast<double>(lhs.i) / factor));
      }
    }
    if (lhs.is_numeric() && rhs.type == T::Timespan && op == '*') {
      return CellValue::timespan(
          static_cast<std::int64_t>(lhs.as_double() * static_cast<double>(rhs.i)));
    }

    if (!lhs.is_numeric() || !rhs.is_numeric()) {
      fail(std::string("cannot apply '") + op + "' to " + type_name(lhs.type) +
           " and " + type_name(rhs.type));
    }
    if (lhs.type == T::Long && rhs.type == T::Long) {
      switch (op) {
        case '+': return CellValue::from_long(lhs.i + rhs.i);
        case '-': return CellValue::from_long(lhs.i - rhs.i);
        case '*': return CellValue::from_long(lhs.i * rhs.i);
        case '/':
          if (rhs.i == 0) fail("division by zero");
          return CellValue::from_long(lhs.i / rhs.i);  // KQL long division
      }
    }
    double x = lhs.as_double();
    double y = rhs.as_double();
    switch (op) {
      case '+': return CellValue::from_double(x + y);
      case '-': return CellValue::from_double(x - y);
      case '*': return CellValue::from_double(x * y);
      case '/':
        if (y == 0) fail("division by zero");
        return CellValue::from_double(x / y);
    }
    fail("bad arithmetic operator");
  }

  CellValue eval_between(const Expr& e, const RowCtx& ctx) {
    if (e.args.size() != 3) fail("between needs a low .. high range");
    CellValue v = eval(e.args[0].get(), ctx);
    CellValue lo = eval(e.args[1].get(), ctx);
    CellValue hi = eval(e.args[2].get(), ctx);
    if (v.is_null() || lo.is_null() || hi.is_null()) {
      return CellValue::from_bool(false);
    }
    auto cl = compare_cells(v, lo);
    auto ch = compare_cells(v, hi);
    if (!cl || !ch) fail("between over incomparable types");
    return CellValue::from_bool(*cl >= 0 && *ch <= 0);
  }

  CellValue eval_case(const Expr& e, const RowCtx& ctx) {
    std::size_t n = e.args.size();
    std::size_t pairs = n / 2;
    for (std::size_t k = 0; k < pairs; ++k) {
      if (truthy(eval(e.args[2 * k].get(), ctx))) {
        return eval(e.args[2 * k + 1].get(), ctx);
      }
    }
    if (n % 2 == 1) return eval(e.args[n - 1].get(), ctx);
    return CellValue::null();
  }

  CellValue eval_property(const Expr& e, const RowCtx& ctx) {
    CellValue base = eval(e.args.empty() ? nullptr : e.args[0].get(), ctx);
    if (base.is_null()) return CellValue::null();
    if (base.type != CellValue::Type::Dynamic || !base.dyn) {
      fail("property access on " + type_name(base.type));
    }
    const DynamicNode* child = base.dyn->find(e.name);
    return child ? lift_dynamic(*child) : CellValue::null();
  }

  // ---- scalar functions -------------------------------------------------

  CellValue arg(const Expr& call, std::size_t k, const RowCtx& ctx) {
    if (k >= call.args.size()) fail(call.name + ": missing argument");
    return eval(call.args[k].get(), ctx);
  }

  CellValue eval_call(const Expr& e, const RowCtx& ctx) {
    const std::string& f = e.name;
    std::size_t argc = e.args.size();

    if (kql::is_aggregate_function(f)) {
      fail("aggregate '" + f + "' outside summarize");
    }

    if (f == "row_number") {
      if (!ctx.serialized) fail("row_number() requires serialize");
      return CellValue::from_long(static_cast<std::int64_t>(ctx.row_index) + 1);
    }
    if (f == "now") return CellValue::datetime(db_.now_micros);
    if (f == "ago") {
      CellValue span = arg(e, 0, ctx);
      if (span.type != CellValue::Type::Timespan) {
        fail("ago() takes a timespan");
      }
      return CellValue::datetime(db_.now_micros - span.i);
    }
    if (f == "strlen") {
      CellValue v = arg(e, 0, ctx);
      if (v.is_null()) return CellValue::null();
      return CellValue::from_long(static_cast<std::int64_t>(to_text(v).size()));
    }
    if (f == "tolower" || f == "toupper") {
      CellValue v = arg(e, 0, ctx);
      if (v.is_null()) return CellValue::null();
      std::string s = to_text(v);
      for (char& c : s) {
        c = f == "tolower"
                ? static_cast<char>(std::tolower(static_cast<unsigned char>(c)))
                : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      }
      return CellValue::from_string(std::move(s));
    }
    if (f == "tostring") return CellValue::from_string(plain_text(arg(e, 0, ctx)));
    if (f == "toint" || f == "tolong") {
      CellValue v = arg(e, 0, ctx);
      if (v.type == CellValue::Type::Long) return v;
      if (v.type == CellValue::Type::Double) {
        return CellValue::from_long(static_cast<std::int64_t>(v.d));
      }
      if (v.type == CellValue::Type::String) {
        std::int64_t out = 0;
        auto [ptr, ec] = std::from_chars(v.s.data(), v.s.data() + v.s.size(), out);
        if (ec == std::errc() && ptr == v.s.data() + v.s.size()) {
          return CellValue::from_long(out);
        }
      }
      return CellValue::null();
    }
    if (f == "todouble" || f == "toreal") {
      CellValue v = arg(e, 0, ctx);
      if (v.type == CellValue::Type::Double) return v;
      if (v.type == CellValue::Type::Long) {
        return CellValue::from_double(static_cast<double>(v.i));
      }
      if (v.type == CellValue::Type::String) {
        char* end = nullptr;
        double out = std::strtod(v.s.c_str(), &end);
        if (end == v.s.c_str() + v.s.size() && !v.s.empty()) {
          return CellValue::from_double(out);
        }
      }
      return CellValue::null();
    }
    if (f == "todatetime") {
      CellValue v = arg(e, 0, ctx);
      if (v.type == CellValue::Type::DateTime) return v;
      if (v.type == CellValue::Type::String) {
        auto micros = parse_datetime_micros(v.s);
        if (micros) return CellValue::datetime(*micros);
      }
      return CellValue::null();
    }
    if (f == "totimespan") {
      CellValue v = arg(e, 0, ctx);
      if (v.type == CellValue::Type::Timespan) return v;
      if (v.type == CellValue::Type::String) {
        auto micros = parse_timespan_micros(v.s);
        if (micros) return CellValue::timespan(*micros);
      }
      return CellValue::null();
    }
    if (f == "parse_json" || f == "todynamic") {
      CellValue v = arg(e, 0, ctx);
      if (v.type == CellValue::Type::Dynamic) return v;
      if (v.type != CellValue::Type::String) return CellValue::null();
      return parse_json_text(v.s);
    }
    if (f == "isempty" || f == "isnotempty") {
      CellValue v = arg(e, 0, ctx);
      bool empty = v.is_null() ||
                   (v.type == CellValue::Type::String && v.s.empty());
      return CellValue::from_bool(f == "isempty" ? empty : !empty);
    }
    if (f == "isnull" || f == "isnotnull") {
      bool null = arg(e, 0, ctx).is_null();
      return CellValue::from_bool(f == "isnull" ? null : !null);
    }
    if (f == "coalesce") {
      for (std::size_t k = 0; k < argc; ++k) {
        CellValue v = arg(e, k, ctx);
        if (!v.is_null()) return v;
      }
      return CellValue::null();
    }
    if (f == "iff" || f == "iif") {
      return truthy(arg(e, 0, ctx)) ? arg(e, 1, ctx) : arg(e, 2, ctx);
    }
    if (f == "strcat") {
      std::string out;
      for (std::size_t k = 0; k < argc; ++k) out += plain_text(arg(e, k, ctx));
      return CellValue::from_string(std::move(out));
    }
    if (f == "substring") {
      CellValue v = arg(e, 0, ctx);
      CellValue start = arg(e, 1, ctx);
      if (v.is_null()) return CellValue::null();
      std::string s = to_text(v);
      std::int64_t from = start.type == CellValue::Type::Long ? start.i : 0;
      from = std::clamp<std::int64_t>(from, 0, static_cast<std::int64_t>(s.size()));
      std::size_t len = s.size() - static_cast<std::size_t>(from);
      if (argc >= 3) {
        CellValue n = arg(e, 2, ctx);
        if (n.type == CellValue::Type::Long && n.i >= 0) {
          len = std::min<std::size_t>(len, static_cast<std::size_t>(n.i));
        }
      }
      return CellValue::from_string(s.substr(static_cast<std::size_t>(from), len));
    }
    if (f == "replace_string") {
      std::string s = to_text(arg(e, 0, ctx));
      std::string find = to_text(arg(e, 1, ctx));
      std::string repl = to_text(arg(e, 2, ctx));
      if (find.empty()) return CellValue::from_string(std::move(s));
      std::string out;
      std::size_t pos = 0;
      while (true) {
        std::size_t hit = s.find(find, pos);
        if (hit == std::string::npos) {
          out += s.substr(pos);
          break;
        }
        out += s.substr(pos, hit - pos);
        out += repl;
        pos = hit + find.size();
      }
      return CellValue::from_string(std::move(out));
    }
    if (f == "split") {
      std::string s = to_text(arg(e, 0, ctx));
      std::string sep = to_text(arg(e, 1, ctx));
      DynamicNode node;
      node.kind = DynamicNode::Kind::Array;
      if (sep.empty()) {
        DynamicNode item;
        item.kind = DynamicNode::Kind::String;
        item.s = s;
        node.array.push_back(std::move(item));
      } else {
        std::size_t pos = 0;
        while (true) {
          std::size_t hit = s.find(sep, pos);
          DynamicNode item;
          item.kind = DynamicNode::Kind::String;
          item.s = s.substr(pos, hit == std::string::npos ? std::string::npos
                                                          : hit - pos);
          node.array.push_back(std::move(item));
          if (hit == std::string::npos) break;
          pos = hit + sep.size();
        }
      }
      return CellValue::dynamic(std::move(node));
    }
    if (f == "array_length") {
      CellValue v = arg(e, 0, ctx);
      if (v.type == CellValue::Type::Dynamic && v.dyn &&
          v.dyn->kind == DynamicNode::Kind::Array) {
        return CellValue::from_long(static_cast<std::int64_t>(v.dyn->array.size()));
      }
      return CellValue::null();
    }
    if (f == "bin" || f == "startofday") {
      CellValue v = arg(e, 0, ctx);
      CellValue size = f == "startofday" ? CellValue::timespan(86400000000LL)
                                         : arg(e, 1, ctx);
      if (v.is_null() || size.is_null()) return CellValue::null();
      if (v.type == CellValue::Type::DateTime &&
          size.type == CellValue::Type::Timespan && size.i > 0) {
        return CellValue::datetime(floor_div(v.i, size.i) * size.i);
      }
      if (v.type == CellValue::Type::Timespan &&
          size.type == CellValue::Type::Timespan && size.i > 0) {
        return CellValue::timespan(floor_div(v.i, size.i) * size.i);
      }
      if (v.type == CellValue::Type::Long && size.type == CellValue::Type::Long &&
          size.i > 0) {
        return CellValue::from_long(floor_div(v.i, size.i) * size.i);
      }
      if (v.is_numeric() && size.is_numeric() && size.as_double() > 0) {
        double width = size.as_double();
        return CellValue::from_double(std::floor(v.as_double() / width) * width);
      }
      fail("bin() over " + type_name(v.type) + " / " + type_name(size.type));
    }
    if (f == "around") {
      CellValue v = arg(e, 0, ctx);
      CellValue center = arg(e, 1, ctx);
      CellValue delta = arg(e, 2, ctx);
      if (v.is_null() || center.is_null() || delta.is_null()) {
        return CellValue::from_bool(false);
      }
      if (v.type == CellValue::Type::DateTime &&
          center.type == CellValue::Type::DateTime &&
          delta.type == CellValue::Type::Timespan) {
        return CellValue::from_bool(std::llabs(v.i - center.i) <= delta.i);
      }
      if (v.is_numeric() && center.is_numeric() && delta.is_numeric()) {
        return CellValue::from_bool(
            std::fabs(v.as_double() - center.as_double()) <= delta.as_double());
      }
      fail("around() over incompatible types");
    }
    if (f == "range") {
      CellValue from = arg(e, 0, ctx);
      CellValue to = arg(e, 1, ctx);
      CellValue step = argc >= 3 ? arg(e, 2, ctx) : CellValue::from_long(1);
      DynamicNode node;
      node.kind = DynamicNode::Kind::Array;
      generate_range(from, to, step, [&node](const CellValue& v) {
        DynamicNode item;
        switch (v.type) {
          case CellValue::Type::Long:
            item.kind = DynamicNode::Kind::Long;
            item.i = v.i;
            break;
          case CellValue::Type::Double:
            item.kind = DynamicNode::Kind::Double;
            item.d = v.d;
            break;
          case CellValue::Type::DateTime:
            item.kind = DynamicNode::Kind::String;
            item.s = format_datetime_micros(v.i);
            break;
          default:
            break;
        }
        node.array.push_back(std::move(item));
      });
      return CellValue::dynamic(std::move(node));
    }
    if (f == "toscalar") return arg(e, 0, ctx);
    if (f == "next" || f == "prev") {
      fail("window function '" + f + "' is not supported");
    }
    fail("unsupported function '" + f + "'");
  }

  // JSON decoding is owned by the table-data loader; reuse its cell parser.
  CellValue parse_json_text(const std::string& text) {
    std::string error;
    CellValue v = parse_cell(text, true, "dynamic", error);
    if (!error.empty()) return CellValue::null();
    return v;
  }

  template <typename Emit>
  void generate_range(const CellValue& from, const CellValue& to,
                      const CellValue& step, Emit emit) {
    if (from.type == CellValue::Type::DateTime &&
        to.type == CellValue::Type::DateTime &&
        step.type == CellValue::Type::Timespan) {
      if (step.i == 0) fail("range step must be nonzero");
      std::size_t count = 0;
      if (step.i > 0) {
        for (std::int64_t v = from.i; v <= to.i; v += step.i) {
          if (++count > kMaxRangeRows) fail("range too large");
          emit(CellValue::datetime(v));
        }
      } else {
        for (std::int64_t v = from.i; v >= to.i; v += step.i) {
          if (++count > kMaxRangeRows) fail("range too large");
          emit(CellValue::datetime(v));
        }
      }
      return;
    }
    if (from.type == CellValue::Type::Long && to.type == CellValue::Type::Long &&
        step.type == CellValue::Type::Long) {
      if (step.i == 0) fail("range step must be nonzero");
      std::size_t count = 0;
      if (step.i > 0) {
        for (std::int64_t v = from.i; v <= to.i; v += step.i) {
          if (++count > kMaxRangeRows) fail("range too large");
          emit(CellValue::from_long(v));
        }
      } else {
        for (std::int64_t v = from.i; v >= to.i; v += step.i) {
          if (++count > kMaxRangeRows) fail("range too large");
          emit(CellValue::from_long(v));
        }
      }
      return;
    }
    if (from.is_numeric() && to.is_numeric() && step.is_numeric()) {
      double s = step.as_double();
      if (s == 0) fail("range step must be nonzero");
      std::size_t count = 0;
      if (s > 0) {
        for (double v = from.as_double(); v <= to.as_double(); v += s) {
          if (++count > kMaxRangeRows) fail("range too large");
          emit(CellValue::from_double(v));
        }
      } else {
        for (double v = from.as_double(); v >= to.as_double(); v += s) {
          if (++count > kMaxRangeRows) fail("range too large");
          emit(CellValue::from_double(v));
        }
      }
      return;
    }
    fail("range over incompatible types");
  }

  // ---- sources ----------------------------------------------------------

  ResultTable table_by_name(const std::string& name, const Env& env,
                            kql::Span span) {
    (void)span;
    auto it = env.tables.find(name);
    if (it != env.tables.end()) return it->second;
    const DataTable* table = db_.find(name);
    if (table == nullptr) fail("unknown table '" + name + "'");
    ResultTable out;
    for (const auto& col : table->columns) out.columns.push_back(col.name);
    out.rows = table->rows;
    return out;
  }

  ResultTable resolve_source(const TableExpression* te, const Env& env) {
    if (te == nullptr) fail("query has no source");
    switch (te->kind) {
      case TableExprKind::Table:
        return table_by_name(te->table, env, te->span);
      case TableExprKind::Union: {
        std::vector<ResultTable> members;
        members.reserve(te->union_tables.size());
        for (const auto& name : te->union_tables) {
          members.push_back(table_by_name(name, env, te->span));
        }
        return union_tables(members);
      }
      case TableExprKind::Range: {
        RowCtx ctx;
        ctx.env = &env;
        CellValue from = eval(te->range_from.get(), ctx);
        CellValue to = eval(te->range_to.get(), ctx);
        CellValue step = eval(te->range_step.get(), ctx);
        ResultTable out;
        out.columns.push_back(te->range_var);
        generate_range(from, to, step, [&out](const CellValue& v) {
          out.rows.push_back({v});
        });
        return out;
      }
      case TableExprKind::Subquery:
        if (!te->subquery) fail("empty subquery source");
        return run(*te->subquery, env);
    }
    fail("bad table expression");
  }

  static ResultTable union_tables(const std::vector<ResultTable>& members) {
    ResultTable out;
    for (const auto& m : members) {
      for (const auto& col : m.columns) {
        if (std::find(out.columns.begin(), out.columns.end(), col) ==
            out.columns.end()) {
          out.columns.push_back(col);
        }
      }
    }
    for (const auto& m : members) {
      std::vector<std::size_t> mapping(out.columns.size(),
                                       std::numeric_limits<std::size_t>::max());
      for (std::size_t i = 0; i < out.columns.size(); ++i) {
        auto it = std::find(m.columns.begin(), m.columns.end(), out.columns[i]);
        if (it != m.columns.end()) {
          mapping[i] = static_cast<std::size_t>(it - m.columns.begin());
        }
      }
      for (const auto& row : m.rows) {
        std::vector<CellValue> aligned(out.columns.size());
        for (std::size_t i = 0; i < out.columns.size(); ++i) {
          if (mapping[i] != std::numeric_limits<std::size_t>::max()) {
            aligned[i] = row[mapping[i]];
          }
        }
        out.rows.push_back(std::move(aligned));
      }
    }
    return out;
  }

  // ---- stages -----------------------------------------------------------

  ResultTable apply_stage(const PipeStage& stage, ResultTable in,
                          const Env& env, bool& serialized) {
    switch (stage.kind) {
      case StageKind::Where: return apply_where(stage, std::move(in), env, serialized);
      case StageKind::Project: return apply_project(stage, std::move(in), env, serialized);
      case StageKind::Extend:
      case StageKind::BareAssign:
        return apply_extend(stage, std::move(in), env, serialized);
      case StageKind::Summarize: {
        serialized = false;
        return apply_summarize(stage, std::move(in), env);
      }
      case StageKind::OrderBy: {
        ResultTable out = apply_order(stage, std::move(in), env);
        serialized = true;  // ordered output admits row_number()
        return out;
      }
      case StageKind::Take: return apply_take(stage, std::move(in), env);
      case StageKind::Top: {
        ResultTable out = apply_top(stage, std::move(in), env);
        serialized = true;
        return out;
      }
      case StageKind::Distinct: {
        serialized = false;
        return apply_distinct(stage, std::move(in), env);
      }
      case StageKind::Join: {
        serialized = false;
        return apply_join(stage, std::move(in), env);
      }
      case StageKind::MvExpand: return apply_mv_expand(stage, std::move(in), env, serialized);
      case StageKind::MvApply: fail("mv-apply execution is not supported");
      case StageKind::Serialize: {
        serialized = true;
        return apply_extend(stage, std::move(in), env, serialized);
      }
      case StageKind::Count: {
        ResultTable out;
        out.columns.push_back("Count");
        out.rows.push_back({CellValue::from_long(
            static_cast<std::int64_t>(in.rows.size()))});
        return out;
      }
      case StageKind::Render: return in;  // visualization hint, data unchanged
    }
    fail("unsupported stage");
  }

  RowCtx row_ctx(const ResultTable& table, std::size_t index, const Env& env,
                 bool serialized) {
    RowCtx ctx;
    ctx.columns = &table.columns;
    ctx.row = &table.rows[index];
    ctx.row_index = index;
    ctx.serialized = serialized;
    ctx.env = &env;
    return ctx;
  }

  ResultTable apply_where(const PipeStage& stage, ResultTable in,
                          const Env& env, bool serialized) {
    ResultTable out;
    out.columns = in.columns;
    for (std::size_t r = 0; r < in.rows.size(); ++r) {
      CellValue v = eval(stage.expr.get(), row_ctx(in, r, env, serialized));
      if (!v.is_null() && truthy(v)) out.rows.push_back(std::move(in.rows[r]));
    }
    return out;
  }

  static std::string item_name(const NamedExpr& item, std::size_t index) {
    if (!item.name.empty()) return item.name;
    return kql::projected_auto_name(*item.expr, index);
  }

  ResultTable apply_project(const PipeStage& stage, ResultTable in,
                            const Env& env, bool serialized) {
    ResultTable out;
    for (std::size_t i = 0; i < stage.items.size(); ++i) {
      std::string name = item_name(stage.items[i], i);
      if (std::find(out.columns.begin(), out.columns.end(), name) !=
          out.columns.end()) {
        fail("duplicate column '" + name + "' in project");
      }
      out.columns.push_back(std::move(name));
    }
    for (std::size_t r = 0; r < in.rows.size(); ++r) {
      RowCtx ctx = row_ctx(in, r, env, serialized);
      std::vector<CellValue> row;
      row.reserve(stage.items.size());
      for (const auto& item : stage.items) {
        row.push_back(eval(item.expr.get(), ctx));
      }
      out.rows.push_back(std::move(row));
    }
    return out;
  }

  ResultTable apply_extend(const PipeStage& stage, ResultTable in,
                           const Env& env, bool serialized) {
    for (std::size_t i = 0; i < stage.items.size(); ++i) {
      std::string name = item_name(stage.items[i], i);
      auto existing = std::find(in.columns.begin(), in.columns.end(), name);
      std::size_t target;
      if (existing != in.columns.end()) {
        target = static_cast<std::size_t>(existing - in.columns.begin());
      } else {
        target = in.columns.size();
        in.columns.push_back(name);
      }
      for (std::size_t r = 0; r < in.rows.size(); ++r) {
        RowCtx ctx = row_ctx(in, r, env, serialized);
        CellValue v = eval(stage.items[i].expr.get(), ctx);
        if (target < in.rows[r].size()) {
          in.rows[r][target] = std::move(v);
        } else {
          in.rows[r].push_back(std::move(v));
        }
      }
    }
    return in;
  }

  // ---- summarize ----------------------------------------------------------

  void collect_aggregates(const Expr* e, std::vector<const Expr*>& out) {
    if (e == nullptr) return;
    if (e->kind == ExprKind::FunctionCall &&
        kql::is_aggregate_function(e->name)) {
      out.push_back(e);
      return;  // nested aggregates rejected by validation
    }
    for (const auto& a : e->args) collect_aggregates(a.get(), out);
  }

  CellValue compute_aggregate(const Expr& call, const ResultTable& in,
                              const std::vector<std::size_t>& rows,
                              const Env& env) {
    const std::string& f = call.name;
    auto values_of = [&](std::size_t arg_index) {
      std::vector<CellValue> values;
      values.reserve(rows.size());
      for (std::size_t r : rows) {
        values.push_back(
            eval(call.args[arg_index].get(), row_ctx(in, r, env, false)));
      }
      return values;
    };
    auto require_args = [&](std::size_t n) {
      if (call.args.size() < n) fail(f + ": missing arguments");
    };

    if (f == "count") {
      return CellValue::from_long(static_cast<std::int64_t>(rows.size()));
    }
    if (f == "countif") {
      require_args(1);
      std::int64_t n = 0;
      for (std::size_t r : rows) {
        if (truthy(eval(call.args[0].get(), row_ctx(in, r, env, false)))) ++n;
      }
      return CellValue::from_long(n);
    }
    if (f == "dcount" || f == "dcountif") {
      require_args(f == "dcountif" ? 2 : 1);
      std::set<std::string> seen;
      for (std::size_t r : rows) {
        RowCtx ctx = row_ctx(in, r, env, false);
        if (f == "dcountif" && !truthy(eval(call.args[1].get(), ctx))) continue;
        CellValue v = eval(call.args[0].get(), ctx);
        if (!v.is_null()) seen.insert(v.canonical_text());
      }
      return CellValue::from_long(static_cast<std::int64_t>(seen.size()));
    }
    if (f == "sum" || f == "sumif" || f == "avg" || f == "avgif") {
      require_args(f.back() == 'f' ? 2 : 1);
      bool all_long = true;
      double total = 0;
      std::int64_t long_total = 0;
      std::int64_t n = 0;
      for (std::size_t r : rows) {
        RowCtx ctx = row_ctx(in, r, env, false);
        if (f.back() == 'f' && !truthy(eval(call.args[1].get(), ctx))) continue;
        CellValue v = eval(call.args[0].get(), ctx);
        if (v.is_null()) continue;
        if (!v.is_numeric()) fail(f + " over " + type_name(v.type));
        if (v.type == CellValue::Type::Double) all_long = false;
        total += v.as_double();
        if (v.type == CellValue::Type::Long) long_total += v.i;
        ++n;
      }
      if (n == 0) return CellValue::null();
      if (f[0] == 'a') return CellValue::from_double(total / static_cast<double>(n));
      if (all_long) return CellValue::from_long(long_total);
      return CellValue::from_double(total);
    }
    if (f == "min" || f == "max" || f == "minif" || f == "maxif") {
      require_args(f.size() > 3 ? 2 : 1);
      CellValue best;
      for (std::size_t r : rows) {
        RowCtx ctx = row_ctx(in, r, env, false);
        if (f.size() > 3 && !truthy(eval(call.args[1].get(), ctx))) continue;
        CellValue v = eval(call.args[0].get(), ctx);
        if (v.is_null()) continue;
        if (best.is_null()) {
          best = v;
          continue;
        }
        auto cmp = compare_cells(v, best);
        if (!cmp) fail(f + " over mixed types");
        if ((f[1] == 'i' && *cmp < 0) || (f[1] == 'a' && *cmp > 0)) best = v;
      }
      return best;
    }
    if (f == "make_list" || f == "make_set") {
      require_args(1);
      auto values = values_of(0);
      DynamicNode node;
      node.kind = DynamicNode::Kind::Array;
      if (f == "make_set") {
        std::set<std::string> seen;
        std::vector<std::pair<std::string, const CellValue*>> ordered;
        for (const auto& v : values) {
          if (v.is_null()) continue;
          std::string key = v.canonical_text();
          if (seen.insert(key).second) ordered.emplace_back(std::move(key), &v);
        }
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [key, v] : ordered) node.array.push_back(to_dynamic(*v));
      } else {
        for (const auto& v : values) {
          if (!v.is_null()) node.array.push_back(to_dynamic(v));
        }
      }
      return CellValue::dynamic(std::move(node));
    }
    if (f == "make_bag") {
      require_args(1);
      DynamicNode bag;
      bag.kind = DynamicNode::Kind::Object;
      for (const auto& v : values_of(0)) {
        if (v.type != CellValue::Type::Dynamic || !v.dyn ||
            v.dyn->kind != DynamicNode::Kind::Object) {
          continue;
        }
        for (const auto& [key, child] : v.dyn->object) {
          bool replaced = false;
          for (auto& [bk, bv] : bag.object) {
            if (bk == key) {
              bv = child;
              replaced = true;
              break;
            }
          }
          if (!replaced) bag.object.emplace_back(key, child);
        }
      }
      std::sort(bag.object.begin(), bag.object.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      return CellValue::dynamic(std::move(bag));
    }
    if (f == "arg_max" || f == "arg_min") {
      if (call.args.size() != 2) {
        fail(f + " supports exactly (sortColumn, returnColumn)");
      }
      std::optional<std::size_t> best_row;
      CellValue best;
      for (std::size_t r : rows) {
        CellValue v = eval(call.args[0].get(), row_ctx(in, r, env, false));
        if (v.is_null()) continue;
        if (!best_row) {
          best_row = r;
          best = v;
          continue;
        }
        auto cmp = compare_cells(v, best);
        if (!cmp) fail(f + " over mixed types");
        if ((f == "arg_max" && *cmp > 0) || (f == "arg_min" && *cmp < 0)) {
          best_row = r;
          best = v;
        }
      }
      if (!best_row) return CellValue::null();
      return eval(call.args[1].get(), row_ctx(in, *best_row, env, false));
    }
    if (f == "percentile") {
      require_args(2);
      CellValue p = eval(call.args[1].get(), RowCtx{nullptr, nullptr, 0, false, &env, nullptr});
      double q = p.is_numeric() ? p.as_double() : 50.0;
      std::vector<double> values;
      for (std::size_t r : rows) {
        CellValue v = eval(call.args[0].get(), row_ctx(in, r, env, false));
        if (v.is_null()) continue;
        if (!v.is_numeric()) fail("percentile over " + type_name(v.type));
        values.push_back(v.as_double());
      }
      if (values.empty()) return CellValue::null();
      std::sort(values.begin(), values.end());
      double rank = std::ceil(q / 100.0 * static_cast<double>(values.size()));
      std::size_t idx = rank <= 1 ? 0 : static_cast<std::size_t>(rank) - 1;
      idx = std::min(idx, values.size() - 1);
      return CellValue::from_double(values[idx]);
    }
    if (f == "stdev" || f == "variance") {
      require_args(1);
      std::vector<double> values;
      for (const auto& v : values_of(0)) {
        if (v.is_null()) continue;
        if (!v.is_numeric()) fail(f + " over " + type_name(v.type));
        values.push_back(v.as_double());
      }
      if (values.size() < 2) return CellValue::null();
      double mean =
          std::accumulate(values.begin(), values.end(), 0.0) / values.size();
      double ss = 0;
      for (double v : values) ss += (v - mean) * (v - mean);
      double var = ss / static_cast<double>(values.size() - 1);
      return CellValue::from_double(f == "stdev" ? std::sqrt(var) : var);
    }
    if (f == "take_any" || f == "any") {
      require_args(1);
      for (const auto& v : values_of(0)) {
        if (!v.is_null()) return v;
      }
      return CellValue::null();
    }
    fail("unsupported aggregate '" + f + "'");
  }

  static DynamicNode to_dynamic(const CellValue& v) {
    DynamicNode node;
    switch (v.type) {
      case CellValue::Type::Null: break;
      case CellValue::Type::Bool:
        node.kind = DynamicNode::Kind::Bool;
        node.b = v.b;
        break;
      case CellValue::Type::Long:
        node.kind = DynamicNode::Kind::Long;
        node.i = v.i;
        break;
      case CellValue::Type::Double:
        node.kind = DynamicNode::Kind::Double;
        node.d = v.d;
        break;
      case CellValue::Type::String:
        node.kind = DynamicNode::Kind::String;
        node.s = v.s;
        break;
      case CellValue::Type::DateTime:
        node.kind = DynamicNode::Kind::String;
        node.s = format_datetime_micros(v.i);
        break;
      case CellValue::Type::Timespan:
        node.kind = DynamicNode::Kind::Long;
        node.i = v.i;
        break;
      case CellValue::Type::Dynamic:
        if (v.dyn) node = *v.dyn;
        break;
    }
    return node;
  }

  ResultTable apply_summarize(const PipeStage& stage, ResultTable in,
                              const Env& env) {
    ResultTable out;
    std::vector<std::string> key_names;
    for (std::size_t i = 0; i < stage.by_keys.size(); ++i) {
      key_names.push_back(item_name(stage.by_keys[i], i));
      out.columns.push_back(key_names.back());
    }
    for (const auto& item : stage.items) {
      if (!item.name.empty()) {
        out.columns.push_back(item.name);
      } else if (item.expr && item.expr->kind == ExprKind::FunctionCall &&
                 kql::is_aggregate_function(item.expr->name)) {
        out.columns.push_back(kql::aggregate_auto_name(*item.expr));
      } else if (item.expr) {
        out.columns.push_back(
            kql::projected_auto_name(*item.expr, out.columns.size()));
      }
    }

    // Group rows by the canonical text of their key tuple, first-seen order.
    std::map<std::string, std::size_t> group_of;
    std::vector<std::vector<CellValue>> group_keys;
    std::vector<std::vector<std::size_t>> group_rows;
    for (std::size_t r = 0; r < in.rows.size(); ++r) {
      RowCtx ctx = row_ctx(in, r, env, false);
      std::vector<CellValue> keys;
      std::string signature;
      for (const auto& key : stage.by_keys) {
        CellValue v = eval(key.expr.get(), ctx);
        signature += v.canonical_text();
        signature += kSep;
        keys.push_back(std::move(v));
      }
      auto [it, inserted] = group_of.try_emplace(signature, group_keys.size());
      if (inserted) {
        group_keys.push_back(std::move(keys));
        group_rows.emplace_back();
      }
      group_rows[it->second].push_back(r);
    }
    if (stage.by_keys.empty() && group_rows.empty()) {
      // `summarize count()` over empty input still yields one row.
      group_keys.emplace_back();
      group_rows.emplace_back();
    }

    for (std::size_t g = 0; g < group_rows.size(); ++g) {
      std::vector<CellValue> row = group_keys[g];
      // Aggregates are computed once per group, then the item expression is
      // evaluated with those results plugged in and by-keys as the row.
      for (const auto& item : stage.items) {
        std::vector<const Expr*> aggs;
        collect_aggregates(item.expr.get(), aggs);
        std::map<const Expr*, CellValue> overrides;
        for (const Expr* agg : aggs) {
          overrides[agg] = compute_aggregate(*agg, in, group_rows[g], env);
        }
        RowCtx ctx;
        ctx.columns = &key_names;
        ctx.row = &group_keys[g];
        ctx.env = &env;
        ctx.overrides = &overrides;
        row.push_back(eval(item.expr.get(), ctx));
      }
      out.rows.push_back(std::move(row));
    }
    return out;
  }

  // ---- ordering -----------------------------------------------------------

  ResultTable apply_order(const PipeStage& stage, ResultTable in,
                          const Env& env) {
    return sort_rows(std::move(in), stage.order_items, env);
  }

  ResultTable sort_rows(ResultTable in,
                        const std::vector<kql::OrderItem>& items,
                        const Env& env) {
    std::vector<std::vector<CellValue>> keys(in.rows.size());
    for (std::size_t r = 0; r < in.rows.size(); ++r) {
      RowCtx ctx = row_ctx(in, r, env, false);
      for (const auto& item : items) {
        keys[r].push_back(eval(item.expr.get(), ctx));
      }
    }
    std::vector<std::size_t> order(in.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
      for (std::size_t k = 0; k < items.size(); ++k) {
        // KQL default sort direction is descending; nulls sort first
        // ascending and last descending (null is the smallest value).
        bool asc = items[k].direction == kql::SortDirection::Asc;
        const CellValue& va = keys[a][k];
        const CellValue& vb = keys[b][k];
        int cmp;
        if (va.is_null() && vb.is_null()) {
          cmp = 0;
        } else if (va.is_null()) {
          cmp = -1;
        } else if (vb.is_null()) {
          cmp = 1;
        } else {
          auto c = compare_cells(va, vb);
          if (!c) fail("cannot order mixed types");
          cmp = *c;
        }
        if (cmp != 0) return asc ? cmp < 0 : cmp > 0;
      }
      return false;  // stable: preserve input order on ties
    });
    ResultTable out;
    out.columns = std::move(in.columns);
    out.rows.reserve(in.rows.size());
    for (std::size_t idx : order) out.rows.push_back(std::move(in.rows[idx]));
    return out;
  }

  std::int64_t eval_row_count(const PipeStage& stage, const Env& env) {
    RowCtx ctx;
    ctx.env = &env;
    CellValue v = eval(stage.expr.get(), ctx);
    if (v.type != CellValue::Type::Long) fail("row count must be a long");
    return std::max<std::int64_t>(0, v.i);
  }

  ResultTable apply_take(const PipeStage& stage, ResultTable in, const Env& env) {
    std::size_t n = static_cast<std::size_t>(eval_row_count(stage, env));
    if (in.rows.size() > n) in.rows.resize(n);
    return in;
  }

  ResultTable apply_top(const PipeStage& stage, ResultTable in, const Env& env) {
    std::size_t n = static_cast<std::size_t>(eval_row_count(stage, env));
    ResultTable sorted = sort_rows(std::move(in), stage.order_items, env);
    if (sorted.rows.size() > n) sorted.rows.resize(n);
    return sorted;
  }

  ResultTable apply_distinct(const PipeStage& stage, ResultTable in,
                             const Env& env) {
    ResultTable source;
    if (stage.distinct_star) {
      source = std::move(in);
    } else {
      for (std::size_t i = 0; i < stage.items.size(); ++i) {
        source.columns.push_back(item_name(stage.items[i], i));
      }
      for (std::size_t r = 0; r < in.rows.size(); ++r) {
        RowCtx ctx = row_ctx(in, r, env, false);
        std::vector<CellValue> row;
        for (const auto& item : stage.items) {
          row.push_back(eval(item.expr.get(), ctx));
        }
        source.rows.push_back(std::move(row));
      }
    }
    ResultTable out;
    out.columns = source.columns;
    std::set<std::string> seen;
    for (auto& row : source.rows) {
      std::string sig;
      for (const auto& cell : row) {
        sig += cell.canonical_text();
        sig += kSep;
      }
      if (seen.insert(sig).second) out.rows.push_back(std::move(row));
    }
    return out;
  }

  // ---- join ---------------------------------------------------------------

  struct JoinKeys {
    std::vector<std::string> left;
    std::vector<std::string> right;
  };

  JoinKeys join_keys(const PipeStage& stage) {
    JoinKeys keys;
    for (const auto& cond : stage.join_conditions) {
      if (cond->kind == ExprKind::ColumnRef) {
        keys.left.push_back(cond->name);
        keys.right.push_back(cond->name);
        continue;
      }
      if (cond->kind == ExprKind::Binary && cond->name == "==" &&
          cond->args.size() == 2) {
        std::string left_name, right_name;
        for (const auto& side : cond->args) {
          std::string prefix, name;
          if (side->kind == ExprKind::ColumnRef) {
            name = side->name;
          } else if (side->kind == ExprKind::PropertyAccess &&
                     !side->args.empty() &&
                     side->args[0]->kind == ExprKind::ColumnRef) {
            prefix = side->args[0]->name;
            name = side->name;
          } else {
            fail("join condition must compare columns");
          }
          if (prefix == "$right") {
            right_name = name;
          } else if (prefix == "$left" || prefix.empty()) {
            if (left_name.empty()) {
              left_name = name;
            } else {
              right_name = name;
            }
          }
        }
        if (left_name.empty() || right_name.empty()) {
          // A bare `A == B` pair: first is left, second right, handled above;
          // reaching here means both sides claimed the same role.
          fail("join condition must name one column per side");
        }
        keys.left.push_back(left_name);
        keys.right.push_back(right_name);
        continue;
      }
      fail("join condition must be a column equality");
    }
    if (keys.left.empty()) fail("join requires at least one condition");
    return keys;
  }

  static std::size_t column_index(const ResultTable& t, const std::string& name) {
    auto it = std::find(t.columns.begin(), t.columns.end(), name);
    if (it == t.columns.end()) fail("unknown join column '" + name + "'");
    return static_cast<std::size_t>(it - t.columns.begin());
  }

  // Key of one row, or nullopt when any key cell is null (null never joins).
  static std::optional<std::string> key_of(
      const std::vector<CellValue>& row, const std::vector<std::size_t>& idx) {
    std::string key;
    for (std::size_t i : idx) {
      if (row[i].is_null()) return std::nullopt;
      key += row[i].canonical_text();
      key += kSep;
    }
    return key;
  }

  ResultTable apply_join(const PipeStage& stage, ResultTable left,
                         const Env& env) {
    std::string kind = stage.join_kind.empty() ? "innerunique" : stage.join_kind;
    if (kind == "leftantisemi") kind = "leftanti";
    if (kind == "rightantisemi") kind = "rightanti";
    static const std::unordered_set<std::string_view> kSupported = {
        "inner",    "innerunique", "leftouter", "leftsemi",
        "leftanti", "rightsemi",   "rightanti"};
    if (!kSupported.count(kind)) {
      fail("join kind '" + kind + "' is not supported");
    }

    ResultTable right;
    if (!stage.join_right) fail("join has no right side");
    if (stage.join_right->kind == TableExprKind::Table) {
      right = table_by_name(stage.join_right->table, env, stage.join_right->span);
    } else {
      right = resolve_source(stage.join_right.get(), env);
    }

    JoinKeys keys = join_keys(stage);
    std::vector<std::size_t> left_idx, right_idx;
    for (const auto& name : keys.left) left_idx.push_back(column_index(left, name));
    for (const auto& name : keys.right) right_idx.push_back(column_index(right, name));

    std::unordered_map<std::string, std::vector<std::size_t>> right_by_key;
    for (std::size_t r = 0; r < right.rows.size(); ++r) {
      auto key = key_of(right.rows[r], right_idx);
      if (key) right_by_key[*key].push_back(r);
    }

    if (kind == "rightsemi" || kind == "rightanti") {
      std::unordered_set<std::string> left_keys;
      for (const auto& row : left.rows) {
        auto key = key_of(row, left_idx);
        if (key) left_keys.insert(*key);
      }
      ResultTable out;
      out.columns = right.columns;
      for (std::size_t r = 0; r < right.rows.size(); ++r) {
        auto key = key_of(right.rows[r], right_idx);
        bool matched = key && left_keys.count(*key);
        if (matched == (kind == "rightsemi")) {
          out.rows.push_back(std::move(right.rows[r]));
        }
      }
      return out;
    }

    if (kind == "leftsemi" || kind == "leftanti") {
      ResultTable out;
      out.columns = left.columns;
      for (std::size_t r = 0; r < left.rows.size(); ++r) {
        auto key = key_of(left.rows[r], left_idx);
        bool matched = key && right_by_key.count(*key);
        if (matched == (kind == "leftsemi")) {
          out.rows.push_back(std::move(left.rows[r]));
        }
      }
      return out;
    }

    // inner / innerunique / leftouter produce merged rows.
    kql::JoinColumnMerge merge =
        kql::merge_join_columns(left.columns, right.columns);
    ResultTable out;
    out.columns = merge.merged;

    std::vector<std::size_t> left_order;
    if (kind == "innerunique") {
      // KQL deduplicates the left side on the join key, keeping first rows.
      std::unordered_set<std::string> seen;
      for (std::size_t r = 0; r < left.rows.size(); ++r) {
        auto key = key_of(left.rows[r], left_idx);
        if (!key) continue;
        if (seen.insert(*key).second) left_order.push_back(r);
      }
    } else {
      left_order.resize(left.rows.size());
      std::iota(left_order.begin(), left_order.end(), 0);
    }

    for (std::size_t r : left_order) {
      auto key = key_of(left.rows[r], left_idx);
      const std::vector<std::size_t>* matches = nullptr;
      if (key) {
        auto it = right_by_key.find(*key);
        if (it != right_by_key.end()) matches = &it->second;
      }
      if (matches) {
        for (std::size_t rr : *matches) {
          std::vector<CellValue> row = left.rows[r];
          row.insert(row.end(), right.rows[rr].begin(), right.rows[rr].end());
          out.rows.push_back(std::move(row));
        }
      } else if (kind == "leftouter") {
        std::vector<CellValue> row = left.rows[r];
        row.resize(out.columns.size());
        out.rows.push_back(std::move(row));
      }
    }
    return out;
  }

  // ---- mv-expand ------------------------------------------------------------

  CellValue convert_to(const CellValue& v, const std::string& type) {
    if (type.empty() || v.is_null()) return v;
    if (type == "string") return CellValue::from_string(plain_text(v));
    if (type == "long" || type == "int") {
      if (v.type == CellValue::Type::Long) return v;
      if (v.type == CellValue::Type::Double) {
        return CellValue::from_long(static_cast<std::int64_t>(v.d));
      }
      if (v.type == CellValue::Type::String) {
        std::int64_t out = 0;
        auto [ptr, ec] = std::from_chars(v.s.data(), v.s.data() + v.s.size(), out);
        if (ec == std::errc() && ptr == v.s.data() + v.s.size()) {
          return CellValue::from_long(out);
        }
      }
      return CellValue::null();
    }
    if (type == "real" || type == "double") {
      if (v.is_numeric()) return CellValue::from_double(v.as_double());
      if (v.type == CellValue::Type::String) {
        char* end = nullptr;
        double out = std::strtod(v.s.c_str(), &end);
        if (end == v.s.c_str() + v.s.size() && !v.s.empty()) {
          return CellValue::from_double(out);
        }
      }
      return CellValue::null();
    }
    if (type == "datetime") {
      if (v.type == CellValue::Type::DateTime) return v;
      if (v.type == CellValue::Type::String) {
        auto micros = parse_datetime_micros(v.s);
        if (micros) return CellValue::datetime(*micros);
      }
      return CellValue::null();
    }
    if (type == "dynamic") return v;
    return v;
  }

  ResultTable apply_mv_expand(const PipeStage& stage, ResultTable in,
                              const Env& env, bool serialized) {
    std::string target = stage.mv_name;
    std::optional<std::size_t> replace_idx;
    if (target.empty()) {
      if (stage.expr && stage.expr->kind == ExprKind::ColumnRef) {
        target = stage.expr->name;
      } else {
        fail("mv-expand needs a column or Name = expression");
      }
    }
    auto existing = std::find(in.columns.begin(), in.columns.end(), target);
    ResultTable out;
    out.columns = in.columns;
    if (existing != in.columns.end()) {
      replace_idx = static_cast<std::size_t>(existing - in.columns.begin());
    } else {
      out.columns.push_back(target);
    }

    for (std::size_t r = 0; r < in.rows.size(); ++r) {
      CellValue v = eval(stage.expr.get(), row_ctx(in, r, env, serialized));
      std::vector<CellValue> elements;
      if (v.type == CellValue::Type::Dynamic && v.dyn &&
          v.dyn->kind == DynamicNode::Kind::Array) {
        for (const auto& item : v.dyn->array) {
          elements.push_back(convert_to(lift_dynamic(item), stage.mv_typeof));
        }
      } else if (!v.is_null()) {
        elements.push_back(convert_to(v, stage.mv_typeof));
      }
      // Null or empty arrays drop the row, matching mv-expand defaults.
      for (auto& element : elements) {
        std::vector<CellValue> row = in.rows[r];
        if (replace_idx) {
          row[*replace_idx] = std::move(element);
        } else {
          row.push_back(std::move(element));
        }
        out.rows.push_back(std::move(row));
      }
    }
    return out;
  }

  const Database& db_;
};

}  // namespace

ResultTable execute(const Query& query, const Database& db) {
  Executor executor(db);
  return executor.run(query, Env{});
}

std::string row_signature(const std::vector<std::string>& columns,
                          const std::vector<CellValue>& row) {
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(columns.size());
  for (std::size_t i = 0; i < columns.size() && i < row.size(); ++i) {
    pairs.emplace_back(columns[i], row[i].canonical_text());
  }
  std::sort(pairs.begin(), pairs.end());
  std::string out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i) out.push_back(kSep);
    out += pairs[i].first;
    out.push_back('=');
    out += pairs[i].second;
  }
  return out;
}

std::set<std::string> row_signatures(const ResultTable& result) {
  std::set<std::string> out;
  for (const auto& row : result.rows) {
    out.insert(row_signature(result.columns, row));
  }
  return out;
}

std::set<std::string> result_columns(const ResultTable& result) {
  return {result.columns.begin(), result.columns.end()};
}

}  // namespace nl2kql::engine
