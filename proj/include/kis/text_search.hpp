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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kis/corpus.hpp"
#include "kis/ranked_list.hpp"

namespace kis {

enum class TextField : std::size_t { description = 0, speech = 1, ocr = 2 };
inline constexpr std::size_t kTextFieldCount = 3;

std::string_view to_string(TextField field);

/// Lowercases and splits on every non-alphanumeric codepoint. No stemming,
/// no stopwords. Non-ASCII letters are kept; Latin-1 capitals are folded.
std::vector<std::string> tokenize(std::string_view text);

struct Posting {
  std::uint32_t doc = 0;  // corpus shot index
  std::uint32_t tf = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// Per-field inverted index over shot text. Documents are numbered by corpus
/// shot order and postings are sorted by that number.
class TextIndex {
 public:
  struct Field {
    std::unordered_map<std::string, std::vector<Posting>> postings;
    std::vector<std::uint32_t> lengths;
    double average_length = 0.0;
  };

  const Field& field(TextField f) const { return fields_[static_cast<std::size_t>(f)]; }
  std::size_t document_count() const noexcept { return shot_ids_.size(); }
  const std::string& shot_id(std::size_t doc) const { return shot_ids_[doc]; }
  std::size_t document_frequency(TextField f, const std::string& term) const;

  friend TextIndex build_text_index(const Corpus& corpus);

 private:
  std::array<Field, kTextFieldCount> fields_;
  std::vector<std::string> shot_ids_;
};

TextIndex build_text_index(const Corpus& corpus);

struct TextQuery {
  std::string text;
  std::array<double, kTextFieldCount> field_weights{1.0, 1.0, 1.0};

  friend bool operator==(const TextQuery&, const TextQuery&) = default;
};

/// idf(t) = ln((N - df + 0.5) / (df + 0.5) + 1)
double bm25_idf(std::size_t document_count, std::size_t df);

/// Weighted sum of per-field BM25 over the distinct query tokens. Shots with
/// zero score are omitted; descending score, ties by shot id.
RankedList search_text(const TextQuery& query, const TextIndex& index, const Bm25Params& params = {});

}  // namespace kis
