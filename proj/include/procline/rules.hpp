#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "procline/charmap.hpp"
#include "procline/error.hpp"

namespace procline {

// ---------------------------------------------------------------------------
// Condition expression tree.
//
// Line grammar for rule files (one rule per line, '#' comments):
//
//   rule       := ID ":" ["if" cond "then"] action ("," action)*
//   cond       := and_expr ("or" and_expr)*          -- "and" binds tighter
//   and_expr   := primary ("and" primary)*
//   primary    := "(" cond ")" | comparison
//   comparison := ATTR op value | ATTR "in" "{" value ("," value)* "}"
//   op         := "==" | "!=" | "<=" | ">=" | "<" | ">"
//   action     := "include" "(" elem ("," elem)* ")"
//               | "exclude" "(" elem ("," elem)* ")"
//               | "resolve" "(" ID ")"
//               | "set" "(" param "," value ")"
//
// Ordinal comparisons are only legal on ordinal attributes; nominal and
// boolean attributes support ==, != and (nominal only) "in". There is no
// "not": != and "in" cover the negative cases.
// ---------------------------------------------------------------------------

enum class CmpOp { eq, ne, le, ge, lt, gt, in_set };

inline const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::eq: return "==";
    case CmpOp::ne: return "!=";
    case CmpOp::le: return "<=";
    case CmpOp::ge: return ">=";
    case CmpOp::lt: return "<";
    case CmpOp::gt: return ">";
    case CmpOp::in_set: return "in";
  }
  return "==";
}

struct Condition;

struct Comparison {
  std::string attribute;
  CmpOp op = CmpOp::eq;
  std::vector<AttrValue> values;  // one value, or the sorted set for "in"

  bool operator==(const Comparison&) const = default;
};

struct AndExpr {
  std::vector<Condition> children;
  bool operator==(const AndExpr&) const = default;
};

struct OrExpr {
  std::vector<Condition> children;
  bool operator==(const OrExpr&) const = default;
};

struct Condition {
  std::variant<Comparison, AndExpr, OrExpr> node;
  bool operator==(const Condition&) const = default;
};

struct IncludeAction {
  std::vector<std::string> elements;
  bool operator==(const IncludeAction&) const = default;
};

struct ExcludeAction {
  std::vector<std::string> elements;
  bool operator==(const ExcludeAction&) const = default;
};

struct ResolveAction {
  std::string target;
  bool operator==(const ResolveAction&) const = default;
};

using ParamValue = std::variant<double, std::string>;

struct SetAction {
  std::string parameter;
  ParamValue value;
  bool operator==(const SetAction&) const = default;
};

using Action = std::variant<IncludeAction, ExcludeAction, ResolveAction, SetAction>;

struct Rule {
  std::string id;
  std::optional<Condition> condition;  // nullopt = ALWAYS
  std::vector<Action> actions;
  int source_line = 0;

  // source_line is diagnostic only and ignored for structural equality
  bool operator==(const Rule& o) const {
    return id == o.id && condition == o.condition && actions == o.actions;
  }
};

struct RuleSet {
  std::vector<Rule> rules;

  const Rule* find(const std::string& id) const {
    for (const auto& r : rules)
      if (r.id == id) return &r;
    return nullptr;
  }

  bool operator==(const RuleSet&) const = default;
};

// One attribute binding of a project context. likelihood/damage back the
// governing score used for action-conflict resolution; plain contexts keep
// the neutral 2,2.
struct ContextBinding {
  AttrValue value;
  int likelihood = 2;
  int damage = 2;

  bool operator==(const ContextBinding&) const = default;
};

using ProjectContext = std::map<std::string, ContextBinding>;

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

namespace dsl {

enum class TokKind { word, colon, comma, lparen, rparen, lbrace, rbrace, op, end };

struct Token {
  TokKind kind = TokKind::end;
  std::string text;
  int column = 0;  // 1-based
};

inline bool word_start(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '-';
}

inline std::vector<Token> tokenize(const std::string& line, int line_no) {
  std::vector<Token> toks;
  size_t i = 0;
  const size_t n = line.size();
  while (i < n) {
    const char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const int col = static_cast<int>(i) + 1;
    if (c == ':') { toks.push_back({TokKind::colon, ":", col}); ++i; continue; }
    if (c == ',') { toks.push_back({TokKind::comma, ",", col}); ++i; continue; }
    if (c == '(') { toks.push_back({TokKind::lparen, "(", col}); ++i; continue; }
    if (c == ')') { toks.push_back({TokKind::rparen, ")", col}); ++i; continue; }
    if (c == '{') { toks.push_back({TokKind::lbrace, "{", col}); ++i; continue; }
    if (c == '}') { toks.push_back({TokKind::rbrace, "}", col}); ++i; continue; }
    if (c == '=' || c == '!' || c == '<' || c == '>') {
      if (i + 1 < n && line[i + 1] == '=') {
        toks.push_back({TokKind::op, std::string{c, '='}, col});
        i += 2;
      } else if (c == '<' || c == '>') {
        toks.push_back({TokKind::op, std::string(1, c), col});
        ++i;
      } else {
        throw ParseError(line_no, col, "operator expected");
      }
      continue;
    }
    if (word_start(c)) {
      std::string word;
      bool has_colon = false;
      while (i < n) {
        const char w = line[i];
        if (word_start(w)) {
          word += w;
          ++i;
          continue;
        }
        // Edge keys ("pf:A>W:produces", "cf:A>B") embed ':' and '>'.
        if (w == ':' && (word == "pf" || word == "cf" || has_colon) &&
            i + 1 < n && word_start(line[i + 1])) {
          word += w;
          has_colon = true;
          ++i;
          continue;
        }
        if (w == '>' && has_colon && i + 1 < n && word_start(line[i + 1])) {
          word += w;
          ++i;
          continue;
        }
        break;
      }
      toks.push_back({TokKind::word, word, col});
      continue;
    }
    throw ParseError(line_no, col, std::string("unexpected character '") + c + "'");
  }
  toks.push_back({TokKind::end, "", static_cast<int>(n) + 1});
  return toks;
}

inline bool is_keyword(const std::string& w) {
  return w == "if" || w == "then" || w == "and" || w == "or" || w == "in" ||
         w == "include" || w == "exclude" || w == "resolve" || w == "set";
}

struct Parser {
  const std::vector<Token>& toks;
  const std::vector<AttributeDef>& defs;
  int line_no;
  size_t pos = 0;

  const Token& peek() const { return toks[pos]; }
  const Token& next() { return toks[pos++]; }
  bool at_word(const char* w) const {
    return peek().kind == TokKind::word && peek().text == w;
  }
  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(line_no, peek().column, expected);
  }
  void expect(TokKind kind, const char* what) {
    if (peek().kind != kind) fail(what);
    ++pos;
  }

  const AttributeDef& attribute(const Token& tok) const {
    const AttributeDef* def = find_attribute(defs, tok.text);
    if (!def)
      throw Error("E_UNDECLARED", "line " + std::to_string(line_no) +
                                      ": attribute " + tok.text +
                                      " is not declared");
    return *def;
  }

  AttrValue comparison_value(const AttributeDef& def, const Token& tok) {
    if (def.scale.kind == ScaleKind::ordinal) {
      try {
        size_t consumed = 0;
        const int v = std::stoi(tok.text, &consumed);
        if (consumed != tok.text.size()) throw std::invalid_argument(tok.text);
        return v;
      } catch (const std::exception&) {
        throw ParseError(line_no, tok.column, "integer value expected for " +
                                                  def.name);
      }
    }
    try {
      return parse_value(def, tok.text);
    } catch (const Error&) {
      throw ParseError(line_no, tok.column, "value '" + tok.text +
                                                "' not in scale of " + def.name);
    }
  }

  Condition comparison() {
    if (peek().kind != TokKind::word || is_keyword(peek().text))
      fail("condition expected");
    const Token attr_tok = next();
    const AttributeDef& def = attribute(attr_tok);
    if (def.scale.kind == ScaleKind::id_set)
      throw ParseError(line_no, attr_tok.column,
                       "attribute " + def.name +
                           " has scale id_set and cannot appear in conditions");

    Comparison cmp;
    cmp.attribute = def.name;
    if (at_word("in")) {
      next();
      if (def.scale.kind == ScaleKind::boolean)
        throw ParseError(line_no, attr_tok.column,
                         "'in' is not valid for boolean attribute " + def.name);
      cmp.op = CmpOp::in_set;
      expect(TokKind::lbrace, "'{' expected");
      while (true) {
        if (peek().kind != TokKind::word) fail("value expected");
        cmp.values.push_back(comparison_value(def, next()));
        if (peek().kind == TokKind::comma) {
          next();
          continue;
        }
        break;
      }
      expect(TokKind::rbrace, "'}' expected");
      std::sort(cmp.values.begin(), cmp.values.end());
      cmp.values.erase(std::unique(cmp.values.begin(), cmp.values.end()),
                       cmp.values.end());
      return Condition{std::move(cmp)};
    }

    if (peek().kind != TokKind::op) fail("comparison operator expected");
    const Token op_tok = next();
    if (op_tok.text == "==") cmp.op = CmpOp::eq;
    else if (op_tok.text == "!=") cmp.op = CmpOp::ne;
    else if (op_tok.text == "<=") cmp.op = CmpOp::le;
    else if (op_tok.text == ">=") cmp.op = CmpOp::ge;
    else if (op_tok.text == "<") cmp.op = CmpOp::lt;
    else cmp.op = CmpOp::gt;
    if (cmp.op != CmpOp::eq && cmp.op != CmpOp::ne &&
        def.scale.kind != ScaleKind::ordinal)
      throw ParseError(line_no, op_tok.column,
                       "ordinal comparison on non-ordinal attribute " + def.name);
    if (peek().kind != TokKind::word) fail("value expected");
    cmp.values.push_back(comparison_value(def, next()));
    return Condition{std::move(cmp)};
  }

  Condition primary() {
    if (peek().kind == TokKind::lparen) {
      next();
      Condition c = or_expr();
      expect(TokKind::rparen, "')' expected");
      return c;
    }
    return comparison();
  }

  static void splice_and(std::vector<Condition>& out, Condition&& c) {
    if (auto* a = std::get_if<AndExpr>(&c.node)) {
      for (auto& child : a->children) out.push_back(std::move(child));
    } else {
      out.push_back(std::move(c));
    }
  }

  static void splice_or(std::vector<Condition>& out, Condition&& c) {
    if (auto* o = std::get_if<OrExpr>(&c.node)) {
      for (auto& child : o->children) out.push_back(std::move(child));
    } else {
      out.push_back(std::move(c));
    }
  }

  Condition and_expr() {
    Condition first = primary();
    if (!at_word("and")) return first;
    AndExpr conj;
    splice_and(conj.children, std::move(first));
    while (at_word("and")) {
      next();
      splice_and(conj.children, primary());
    }
    return Condition{std::move(conj)};
  }

  Condition or_expr() {
    Condition first = and_expr();
    if (!at_word("or")) return first;
    OrExpr disj;
    splice_or(disj.children, std::move(first));
    while (at_word("or")) {
      next();
      splice_or(disj.children, and_expr());
    }
    return Condition{std::move(disj)};
  }

  std::vector<std::string> element_list() {
    expect(TokKind::lparen, "'(' expected");
    std::vector<std::string> out;
    while (true) {
      if (peek().kind != TokKind::word) fail("element id expected");
      out.push_back(next().text);
      if (peek().kind == TokKind::comma) {
        next();
        continue;
      }
      break;
    }
    expect(TokKind::rparen, "')' expected");
    return out;
  }

  Action action() {
    if (peek().kind != TokKind::word) fail("action expected");
    const Token head = next();
    if (head.text == "include") return IncludeAction{element_list()};
    if (head.text == "exclude") return ExcludeAction{element_list()};
    if (head.text == "resolve") {
      expect(TokKind::lparen, "'(' expected");
      if (peek().kind != TokKind::word) fail("variation point id expected");
      std::string target = next().text;
      expect(TokKind::rparen, "')' expected");
      return ResolveAction{std::move(target)};
    }
    if (head.text == "set") {
      expect(TokKind::lparen, "'(' expected");
      if (peek().kind != TokKind::word) fail("parameter name expected");
      const Token name = next();
      const bool name_ok =
          !name.text.empty() &&
          std::all_of(name.text.begin(), name.text.end(), [](unsigned char c) {
            return (c >= 'a' && c <= 'z') || c == '_';
          });
      if (!name_ok)
        throw ParseError(line_no, name.column,
                         "parameter name must match [a-z_]+");
      expect(TokKind::comma, "',' expected");
      if (peek().kind != TokKind::word) fail("parameter value expected");
      const Token value = next();
      expect(TokKind::rparen, "')' expected");
      char* endp = nullptr;
      const double num = std::strtod(value.text.c_str(), &endp);
      ParamValue pv;
      if (endp && *endp == '\0' && endp != value.text.c_str())
        pv = num;
      else
        pv = value.text;
      return SetAction{name.text, std::move(pv)};
    }
    throw ParseError(line_no, head.column,
                     "action expected (include/exclude/resolve/set)");
  }

  Rule rule() {
    if (peek().kind != TokKind::word) fail("rule id expected");
    const Token id_tok = next();
    if (!valid_id(id_tok.text) || is_keyword(id_tok.text))
      throw ParseError(line_no, id_tok.column, "rule id expected");
    expect(TokKind::colon, "':' expected after rule id");

    Rule r;
    r.id = id_tok.text;
    r.source_line = line_no;
    if (at_word("if")) {
      next();
      r.condition = or_expr();
      if (!at_word("then")) fail("'then' expected");
      next();
    }
    r.actions.push_back(action());
    while (peek().kind == TokKind::comma) {
      next();
      r.actions.push_back(action());
    }
    if (peek().kind != TokKind::end) fail("end of line expected");
    return r;
  }
};

}  // namespace dsl

// ---------------------------------------------------------------------------
// Parsing entry points
// ---------------------------------------------------------------------------

inline RuleSet parse_rules(std::string_view text,
                           const std::vector<AttributeDef>& defs) {
  validate_defs(defs);
  RuleSet rs;
  std::set<std::string> ids;
  int line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    std::string line(text.substr(
        start, nl == std::string_view::npos ? std::string_view::npos
                                            : nl - start));
    ++line_no;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto toks = dsl::tokenize(line, line_no);
    if (toks.front().kind == dsl::TokKind::end) continue;  // blank or comment
    dsl::Parser p{toks, defs, line_no};
    Rule r = p.rule();
    if (!ids.insert(r.id).second)
      throw Error("E_DUP_RULE", "line " + std::to_string(line_no) +
                                    ": rule " + r.id + " already defined");
    rs.rules.push_back(std::move(r));
  }
  return rs;
}

// Parse a bare condition (used by mapping and constraint files).
inline Condition parse_condition(std::string_view text,
                                 const std::vector<AttributeDef>& defs) {
  auto toks = dsl::tokenize(std::string(text), 1);
  dsl::Parser p{toks, defs, 1};
  Condition c = p.or_expr();
  if (p.peek().kind != dsl::TokKind::end) p.fail("end of condition expected");
  return c;
}

// ---------------------------------------------------------------------------
// Printing (canonical form; parse-print-parse is a fixpoint)
// ---------------------------------------------------------------------------

inline std::string print_condition(const Condition& cond);

namespace dsl {

inline std::string print_value(const AttrValue& v) { return value_to_text(v); }

inline std::string print_child(const Condition& c, bool parenthesize_or) {
  const bool is_or = std::holds_alternative<OrExpr>(c.node);
  std::string text = print_condition(c);
  if (is_or && parenthesize_or) return "(" + text + ")";
  return text;
}

}  // namespace dsl

inline std::string print_condition(const Condition& cond) {
  if (const auto* cmp = std::get_if<Comparison>(&cond.node)) {
    if (cmp->op == CmpOp::in_set) {
      std::string out = cmp->attribute + " in {";
      for (size_t i = 0; i < cmp->values.size(); ++i) {
        if (i) out += ", ";
        out += dsl::print_value(cmp->values[i]);
      }
      return out + "}";
    }
    return cmp->attribute + " " + to_string(cmp->op) + " " +
           dsl::print_value(cmp->values.front());
  }
  if (const auto* conj = std::get_if<AndExpr>(&cond.node)) {
    std::string out;
    for (size_t i = 0; i < conj->children.size(); ++i) {
      if (i) out += " and ";
      out += dsl::print_child(conj->children[i], /*parenthesize_or=*/true);
    }
    return out;
  }
  const auto& disj = std::get<OrExpr>(cond.node);
  std::string out;
  for (size_t i = 0; i < disj.children.size(); ++i) {
    if (i) out += " or ";
    out += dsl::print_child(disj.children[i], /*parenthesize_or=*/false);
  }
  return out;
}

inline std::string print_action(const Action& action) {
  if (const auto* inc = std::get_if<IncludeAction>(&action)) {
    std::string out = "include(";
    for (size_t i = 0; i < inc->elements.size(); ++i) {
      if (i) out += ", ";
      out += inc->elements[i];
    }
    return out + ")";
  }
  if (const auto* exc = std::get_if<ExcludeAction>(&action)) {
    std::string out = "exclude(";
    for (size_t i = 0; i < exc->elements.size(); ++i) {
      if (i) out += ", ";
      out += exc->elements[i];
    }
    return out + ")";
  }
  if (const auto* res = std::get_if<ResolveAction>(&action))
    return "resolve(" + res->target + ")";
  const auto& set = std::get<SetAction>(action);
  std::string value;
  if (const double* num = std::get_if<double>(&set.value)) {
    if (*num >= -9.0e18 && *num <= 9.0e18 &&
        *num == static_cast<double>(static_cast<long long>(*num)))
      value = std::to_string(static_cast<long long>(*num));
    else
      value = std::to_string(*num);
  } else {
    value = std::get<std::string>(set.value);
  }
  return "set(" + set.parameter + ", " + value + ")";
}

inline std::string print_rules(const RuleSet& rs) {
  std::string out;
  for (const auto& r : rs.rules) {
    out += r.id;
    out += ": ";
    if (r.condition) {
      out += "if ";
      out += print_condition(*r.condition);
      out += " then ";
    }
    for (size_t i = 0; i < r.actions.size(); ++i) {
      if (i) out += ", ";
      out += print_action(r.actions[i]);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

inline void collect_attributes(const Condition& cond, std::set<std::string>& out) {
  if (const auto* cmp = std::get_if<Comparison>(&cond.node)) {
    out.insert(cmp->attribute);
    return;
  }
  if (const auto* conj = std::get_if<AndExpr>(&cond.node)) {
    for (const auto& c : conj->children) collect_attributes(c, out);
    return;
  }
  for (const auto& c : std::get<OrExpr>(cond.node).children)
    collect_attributes(c, out);
}

inline std::set<std::string> condition_attributes(const Condition& cond) {
  std::set<std::string> out;
  collect_attributes(cond, out);
  return out;
}

namespace dsl {

inline bool eval_node(const Condition& cond, const ProjectContext& ctx) {
  if (const auto* cmp = std::get_if<Comparison>(&cond.node)) {
    const AttrValue& actual = ctx.at(cmp->attribute).value;
    switch (cmp->op) {
      case CmpOp::eq: return actual == cmp->values.front();
      case CmpOp::ne: return actual != cmp->values.front();
      case CmpOp::in_set:
        return std::find(cmp->values.begin(), cmp->values.end(), actual) !=
               cmp->values.end();
      default: break;
    }
    const int lhs = std::get<int>(actual);
    const int rhs = std::get<int>(cmp->values.front());
    switch (cmp->op) {
      case CmpOp::le: return lhs <= rhs;
      case CmpOp::ge: return lhs >= rhs;
      case CmpOp::lt: return lhs < rhs;
      case CmpOp::gt: return lhs > rhs;
      default: return false;
    }
  }
  if (const auto* conj = std::get_if<AndExpr>(&cond.node)) {
    for (const auto& c : conj->children)
      if (!eval_node(c, ctx)) return false;
    return true;
  }
  for (const auto& c : std::get<OrExpr>(cond.node).children)
    if (eval_node(c, ctx)) return true;
  return false;
}

}  // namespace dsl

// Two-valued evaluation. Every attribute referenced anywhere in the
// condition must be bound, including branches short-circuiting would skip;
// a missing binding is E_UNBOUND, never a silent false.
inline bool eval_condition(const Condition& cond, const ProjectContext& ctx) {
  for (const auto& attr : condition_attributes(cond))
    if (!ctx.count(attr))
      throw Error("E_UNBOUND", "attribute " + attr + " is not bound in the "
                               "project context");
  return dsl::eval_node(cond, ctx);
}

}  // namespace procline
