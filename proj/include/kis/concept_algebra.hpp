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

#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kis/corpus.hpp"
#include "kis/ranked_list.hpp"

namespace kis {

/// Weighted boolean concept/object query.
///
/// Surface syntax (keywords case-insensitive, NOT binds tighter than AND,
/// AND tighter than OR):
///
///   expr   := and ("OR" and)*
///   and    := unary ("AND" unary)*
///   unary  := "NOT" unary | "(" expr ")" | leaf
///   leaf   := ["obj/"] label [":" weight]
///   label  := "quoted string" | bare word of [A-Za-z0-9_-]
///
/// A leaf prefixed with obj/ reads the object bank, anything else the concept
/// bank. Weights default to 1 and must be positive.
struct ConceptExpr {
  enum class Kind { leaf, all_of, any_of, negation };

  Kind kind = Kind::leaf;
  std::string label;
  double weight = 1.0;
  BankKind bank = BankKind::concepts;
  std::vector<ConceptExpr> children;

  static ConceptExpr leaf(std::string label, double weight = 1.0, BankKind bank = BankKind::concepts);
  static ConceptExpr all_of(std::vector<ConceptExpr> children);
  static ConceptExpr any_of(std::vector<ConceptExpr> children);
  static ConceptExpr negation(ConceptExpr child);

  /// Exponent weight this node carries inside its parent aggregate: the leaf
  /// weight for leaves, the child's weight for negations, 1 otherwise.
  double aggregate_weight() const;

  friend bool operator==(const ConceptExpr&, const ConceptExpr&) = default;
};

/// Throws ParseError carrying the character offset of the problem.
ConceptExpr parse_concept_query(std::string_view input);

/// Fully parenthesized canonical form; parse_concept_query inverts it.
std::string print_expr(const ConceptExpr& expr);

/// Key under which a leaf's score is looked up: "label" or "obj/label".
std::string leaf_key(const ConceptExpr& leaf);

/// Evaluates with a caller-supplied leaf scorer. Scores must be in [0,1].
double eval_expr(const ConceptExpr& expr, const std::function<double(const ConceptExpr& leaf)>& leaf_score);

/// Evaluates against a map keyed by leaf_key(). Throws UnresolvedLabelError.
double eval_expr(const ConceptExpr& expr, const std::unordered_map<std::string, double>& shot_scores);

/// Case-insensitive prefix matches in lexicographic order, at most `limit`.
std::vector<std::string> list_concepts(const Corpus& corpus, std::string_view prefix, BankKind bank, std::size_t limit);

/// Scores every shot from its bank rows. Zero-score shots are omitted;
/// descending score, ties by shot id. Throws UnresolvedLabelError with
/// near-miss suggestions when a label is not in its bank.
RankedList rank_by_expr(const ConceptExpr& expr, const Corpus& corpus);

}  // namespace kis
