/*
 * Copyright 2026 The KIS Engine Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "kis/concept_algebra.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <unordered_map>

#include "kis/error.hpp"

namespace kis {

namespace {

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
  }
  return true;
}

enum class Keyword { none, op_and, op_or, op_not };

Keyword keyword_of(std::string_view word) {
  if (iequals(word, "and")) return Keyword::op_and;
  if (iequals(word, "or")) return Keyword::op_or;
  if (iequals(word, "not")) return Keyword::op_not;
  return Keyword::none;
}

class Parser {
 public:
  explicit Parser(std::string_view input) : in_(input) {}

  ConceptExpr parse() {
    skip_space();
    if (at_end()) throw ParseError(pos_, "empty query");
    ConceptExpr e = parse_or();
    skip_space();
    if (!at_end()) {
      if (in_[pos_] == ')') throw ParseError(pos_, "unbalanced parenthesis");
      throw ParseError(pos_, "unexpected token");
    }
    return e;
  }

 private:
  bool at_end() const { return pos_ >= in_.size(); }

  void skip_space() {
    while (!at_end() && is_space(in_[pos_])) ++pos_;
  }

  std::string_view peek_word() const {
    std::size_t end = pos_;
    while (end < in_.size() && is_word_char(in_[end])) ++end;
    return in_.substr(pos_, end - pos_);
  }

  Keyword peek_keyword() {
    skip_space();
    return keyword_of(peek_word());
  }

  ConceptExpr parse_or() {
    std::vector<ConceptExpr> children;
    children.push_back(parse_and());
    while (peek_keyword() == Keyword::op_or) {
      const std::size_t op = pos_;
      pos_ += 2;
      children.push_back(continue_and(parse_unary(op)));
    }
    return children.size() == 1 ? std::move(children.front()) : ConceptExpr::any_of(std::move(children));
  }

  ConceptExpr parse_and() { return continue_and(parse_unary(std::nullopt)); }

  ConceptExpr continue_and(ConceptExpr first) {
    std::vector<ConceptExpr> children;
    children.push_back(std::move(first));
    while (peek_keyword() == Keyword::op_and) {
      const std::size_t op = pos_;
      pos_ += 3;
      children.push_back(parse_unary(op));
    }
    return children.size() == 1 ? std::move(children.front()) : ConceptExpr::all_of(std::move(children));
  }

  // `op` is the offset of the operator that requires this operand, if any.
  ConceptExpr parse_unary(std::optional<std::size_t> op) {
    skip_space();
    if (at_end() || in_[pos_] == ')') {
      if (op) throw ParseError(*op, "dangling operator");
      throw ParseError(pos_, "expected operand");
    }
    const Keyword kw = keyword_of(peek_word());
    if (kw == Keyword::op_and || kw == Keyword::op_or) throw ParseError(pos_, "dangling operator");
    if (kw == Keyword::op_not) {
      const std::size_t at = pos_;
      pos_ += 3;
      return ConceptExpr::negation(parse_unary(at));
    }
    if (in_[pos_] == '(') {
      const std::size_t open = pos_++;
      skip_space();
      if (at_end()) throw ParseError(open, "unbalanced parenthesis");
      ConceptExpr inner = parse_or();
      skip_space();
      if (at_end() || in_[pos_] != ')') throw ParseError(open, "unbalanced parenthesis");
      ++pos_;
      return inner;
    }
    return parse_leaf();
  }

  ConceptExpr parse_leaf() {
    BankKind bank = BankKind::concepts;
    if (in_.substr(pos_, 4) == "obj/") {
      bank = BankKind::objects;
      pos_ += 4;
    }
    std::string label;
    const std::size_t label_at = pos_;
    if (!at_end() && in_[pos_] == '"') {
      label = parse_quoted();
      if (label.empty()) throw ParseError(label_at, "empty label");
    } else {
      const auto word = peek_word();
      if (word.empty()) throw ParseError(pos_, "unknown token");
      label = std::string(word);
      pos_ += word.size();
    }
    double weight = 1.0;
    std::size_t save = pos_;
    skip_space();
    if (!at_end() && in_[pos_] == ':') {
      ++pos_;
      skip_space();
      weight = parse_weight();
    } else {
      pos_ = save;
    }
    return ConceptExpr::leaf(std::move(label), weight, bank);
  }

  std::string parse_quoted() {
    const std::size_t open = pos_++;
    std::string out;
    while (!at_end() && in_[pos_] != '"') {
      if (in_[pos_] == '\\' && pos_ + 1 < in_.size()) ++pos_;
      out.push_back(in_[pos_++]);
    }
    if (at_end()) throw ParseError(open, "unterminated string");
    ++pos_;
    return out;
  }

  double parse_weight() {
    const std::size_t at = pos_;
    std::size_t end = pos_;
    if (end < in_.size() && (in_[end] == '-' || in_[end] == '+')) ++end;
    const std::size_t digits_from = end;
    bool any_digit = false;
    while (end < in_.size() && std::isdigit(static_cast<unsigned char>(in_[end]))) ++end, any_digit = true;
    if (end < in_.size() && in_[end] == '.') {
      ++end;
      while (end < in_.size() && std::isdigit(static_cast<unsigned char>(in_[end]))) ++end, any_digit = true;
    }
    if (any_digit && end < in_.size() && (in_[end] == 'e' || in_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < in_.size() && (in_[e] == '-' || in_[e] == '+')) ++e;
      if (e < in_.size() && std::isdigit(static_cast<unsigned char>(in_[e]))) {
        while (e < in_.size() && std::isdigit(static_cast<unsigned char>(in_[e]))) ++e;
        end = e;
      }
    }
    if (!any_digit) throw ParseError(at, "expected weight");
    if (end < in_.size() && (is_word_char(in_[end]) || in_[end] == '.')) throw ParseError(end, "unknown token");
    double value = 0.0;
    const char* first = in_.data() + digits_from;
    const char* last = in_.data() + end;
    // from_chars rejects a leading '+'; digits_from already skips the sign.
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ParseError(at, "malformed weight");
    if (in_[at] == '-') value = -value;
    if (!(value > 0.0) || !std::isfinite(value)) throw ParseError(at, "nonpositive weight");
    pos_ = end;
    return value;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

bool needs_quotes(const std::string& label) {
  if (label.empty()) return true;
  if (!std::all_of(label.begin(), label.end(), is_word_char)) return true;
  return keyword_of(label) != Keyword::none;
}

std::string quote_label(const std::string& label) {
  if (!needs_quotes(label)) return label;
  std::string out = "\"";
  for (char c : label) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_weight(double w) {
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof(buf), w, std::chars_format::fixed);
  if (res.ec != std::errc()) res = std::to_chars(buf, buf + sizeof(buf), w);
  return std::string(buf, res.ptr);
}

void print_into(const ConceptExpr& e, std::string& out) {
  switch (e.kind) {
    case ConceptExpr::Kind::leaf:
      if (e.bank == BankKind::objects) out += "obj/";
      out += quote_label(e.label);
      if (e.weight != 1.0) out += ":" + format_weight(e.weight);
      return;
    case ConceptExpr::Kind::negation:
      out += "(NOT ";
      print_into(e.children.front(), out);
      out += ")";
      return;
    case ConceptExpr::Kind::all_of:
    case ConceptExpr::Kind::any_of: {
      const char* op = e.kind == ConceptExpr::Kind::all_of ? " AND " : " OR ";
      out += "(";
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i > 0) out += op;
        print_into(e.children[i], out);
      }
      out += ")";
      return;
    }
  }
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (ascii_lower(a[i - 1]) == ascii_lower(b[j - 1]) ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool has_prefix_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && iequals(s.substr(0, prefix.size()), prefix);
}

std::vector<std::string> near_misses(const ScoreBank* bank, const std::string& label) {
  if (bank == nullptr) return {};
  std::vector<std::pair<std::size_t, std::string>> scored;
  const std::string_view stem = std::string_view(label).substr(0, std::min<std::size_t>(3, label.size()));
  for (const auto& l : bank->labels) {
    const std::size_t d = edit_distance(label, l);
    if (d <= 2 || (!stem.empty() && has_prefix_ci(l, stem))) scored.emplace_back(d, l);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && i < 5; ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace

ConceptExpr ConceptExpr::leaf(std::string label, double weight, BankKind bank) {
  if (label.empty()) throw InvalidQuery("leaf label must not be empty");
  if (!(weight > 0.0) || !std::isfinite(weight)) throw InvalidQuery("leaf weight must be positive");
  ConceptExpr e;
  e.kind = Kind::leaf;
  e.label = std::move(label);
  e.weight = weight;
  e.bank = bank;
  return e;
}

ConceptExpr ConceptExpr::all_of(std::vector<ConceptExpr> children) {
  if (children.size() < 2) throw InvalidQuery("AND needs at least two operands");
  ConceptExpr e;
  e.kind = Kind::all_of;
  e.children = std::move(children);
  return e;
}

ConceptExpr ConceptExpr::any_of(std::vector<ConceptExpr> children) {
  if (children.size() < 2) throw InvalidQuery("OR needs at least two operands");
  ConceptExpr e;
  e.kind = Kind::any_of;
  e.children = std::move(children);
  return e;
}

ConceptExpr ConceptExpr::negation(ConceptExpr child) {
  ConceptExpr e;
  e.kind = Kind::negation;
  e.children.push_back(std::move(child));
  return e;
}

double ConceptExpr::aggregate_weight() const {
  switch (kind) {
    case Kind::leaf:
      return weight;
    case Kind::negation:
      return children.front().aggregate_weight();
    default:
      return 1.0;
  }
}

ConceptExpr parse_concept_query(std::string_view input) { return Parser(input).parse(); }

std::string print_expr(const ConceptExpr& expr) {
  std::string out;
  print_into(expr, out);
  return out;
}

std::string leaf_key(const ConceptExpr& leaf) {
  return leaf.bank == BankKind::objects ? "obj/" + leaf.label : leaf.label;
}

double eval_expr(const ConceptExpr& expr, const std::function<double(const ConceptExpr&)>& leaf_score) {
  switch (expr.kind) {
    case ConceptExpr::Kind::leaf:
      return leaf_score(expr);
    case ConceptExpr::Kind::negation:
      return 1.0 - eval_expr(expr.children.front(), leaf_score);
    case ConceptExpr::Kind::all_of:
    case ConceptExpr::Kind::any_of: {
      const bool conj = expr.kind == ConceptExpr::Kind::all_of;
      double total_weight = 0.0;
      for (const auto& c : expr.children) total_weight += c.aggregate_weight();
      double product = 1.0;
      for (const auto& c : expr.children) {
        const double v = eval_expr(c, leaf_score);
        product *= std::pow(conj ? v : 1.0 - v, c.aggregate_weight() / total_weight);
      }
      return conj ? product : 1.0 - product;
    }
  }
  return 0.0;
}

double eval_expr(const ConceptExpr& expr, const std::unordered_map<std::string, double>& shot_scores) {
  return eval_expr(expr, [&](const ConceptExpr& leaf) {
    auto it = shot_scores.find(leaf_key(leaf));
    if (it == shot_scores.end()) throw UnresolvedLabelError(leaf_key(leaf), {});
    if (!(it->second >= 0.0 && it->second <= 1.0)) throw InvalidQuery("score for '" + it->first + "' outside [0,1]");
    return it->second;
  });
}

std::vector<std::string> list_concepts(const Corpus& corpus, std::string_view prefix, BankKind bank, std::size_t limit) {
  const ScoreBank* b = corpus.bank(bank);
  if (b == nullptr) return {};
  std::vector<std::string> out;
  for (const auto& l : b->labels) {
    if (has_prefix_ci(l, prefix)) out.push_back(l);
  }
  std::sort(out.begin(), out.end());
  if (out.size() > limit) out.resize(limit);
  return out;
}

RankedList rank_by_expr(const ConceptExpr& expr, const Corpus& corpus) {
  struct Column {
    const ScoreBank* bank;
    std::size_t col;
  };
  std::unordered_map<const ConceptExpr*, Column> columns;
  std::function<void(const ConceptExpr&)> resolve = [&](const ConceptExpr& e) {
    if (e.kind != ConceptExpr::Kind::leaf) {
      for (const auto& c : e.children) resolve(c);
      return;
    }
    const ScoreBank* bank = corpus.bank(e.bank);
    if (bank != nullptr) {
      auto it = std::find(bank->labels.begin(), bank->labels.end(), e.label);
      if (it != bank->labels.end()) {
        columns.emplace(&e, Column{bank, static_cast<std::size_t>(it - bank->labels.begin())});
        return;
      }
    }
    auto suggestions = near_misses(bank, e.label);
    if (e.bank == BankKind::objects) {
      for (auto& s : suggestions) s = "obj/" + s;
    }
    throw UnresolvedLabelError(leaf_key(e), std::move(suggestions));
  };
  resolve(expr);

  RankedList out;
  out.provenance = "concept";
  for (std::size_t row = 0; row < corpus.shot_count(); ++row) {
    const double score = eval_expr(expr, [&](const ConceptExpr& leaf) {
      const Column& c = columns.at(&leaf);
      return static_cast<double>(c.bank->at(row, c.col));
    });
    if (score > 0.0) out.entries.push_back({corpus.shot(row).id, score});
  }
  sort_by_score(out.entries);
  return out;
}

}  // namespace kis
