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

#include "kis/text_search.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kis/error.hpp"

namespace kis {

namespace {

// Decodes one UTF-8 codepoint; malformed bytes decode as U+FFFD, one byte each.
char32_t next_codepoint(std::string_view s, std::size_t& i) {
  const auto c0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) { return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80; };
  auto bits = [&](std::size_t k) { return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F); };
  if (c0 < 0x80) {
    i += 1;
    return c0;
  }
  if ((c0 & 0xE0) == 0xC0 && cont(1)) {
    const char32_t cp = (static_cast<char32_t>(c0 & 0x1F) << 6) | bits(1);
    i += 2;
    return cp;
  }
  if ((c0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    const char32_t cp = (static_cast<char32_t>(c0 & 0x0F) << 12) | (bits(1) << 6) | bits(2);
    i += 3;
    return cp;
  }
  if ((c0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    const char32_t cp = (static_cast<char32_t>(c0 & 0x07) << 18) | (bits(1) << 12) | (bits(2) << 6) | bits(3);
    i += 4;
    return cp;
  }
  i += 1;
  return 0xFFFD;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// ASCII alphanumerics, plus any codepoint above U+007F that is not in a
// punctuation, symbol, or space block.
bool is_alnum(char32_t cp) {
  if (cp < 0x80) return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows, box drawing
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp == 0xFFFD || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji and pictographs
  return true;
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  return cp;
}

}  // namespace

std::string_view to_string(TextField field) {
  switch (field) {
    case TextField::description:
      return "description";
    case TextField::speech:
      return "speech";
    case TextField::ocr:
      return "ocr";
  }
  return "";
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = next_codepoint(text, i);
    if (is_alnum(cp)) {
      append_utf8(current, to_lower(cp));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::size_t TextIndex::document_frequency(TextField f, const std::string& term) const {
  const auto& p = field(f).postings;
  auto it = p.find(term);
  return it == p.end() ? 0 : it->second.size();
}

TextIndex build_text_index(const Corpus& corpus) {
  TextIndex idx;
  const std::size_t n = corpus.shot_count();
  idx.shot_ids_.reserve(n);
  for (auto& f : idx.fields_) f.lengths.assign(n, 0);
  for (std::size_t doc = 0; doc < n; ++doc) {
    const Shot& s = corpus.shot(doc);
    idx.shot_ids_.push_back(s.id);
    const std::array<const std::string*, kTextFieldCount> texts{&s.description, &s.speech, &s.ocr};
    for (std::size_t f = 0; f < kTextFieldCount; ++f) {
      auto tokens = tokenize(*texts[f]);
      idx.fields_[f].lengths[doc] = static_cast<std::uint32_t>(tokens.size());
      std::sort(tokens.begin(), tokens.end());
      for (std::size_t i = 0; i < tokens.size();) {
        std::size_t j = i;
        while (j < tokens.size() && tokens[j] == tokens[i]) ++j;
        // Documents are visited in order, so each postings list stays sorted.
        idx.fields_[f].postings[tokens[i]].push_back({static_cast<std::uint32_t>(doc), static_cast<std::uint32_t>(j - i)});
        i = j;
      }
    }
  }
  for (auto& f : idx.fields_) {
    double total = 0.0;
    for (auto len : f.lengths) total += len;
    f.average_length = n == 0 ? 0.0 : total / static_cast<double>(n);
  }
  return idx;
}

double bm25_idf(std::size_t document_count, std::size_t df) {
  const double N = static_cast<double>(document_count);
  const double d = static_cast<double>(df);
  return std::log((N - d + 0.5) / (d + 0.5) + 1.0);
}

RankedList search_text(const TextQuery& query, const TextIndex& index, const Bm25Params& params) {
  for (double w : query.field_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidQuery("text field weights must be finite and nonnegative");
  }
  if (std::all_of(query.field_weights.begin(), query.field_weights.end(), [](double w) { return w == 0.0; })) {
    throw InvalidQuery("at least one text field weight must be positive");
  }
  const auto tokens = tokenize(query.text);
  const std::set<std::string> terms(tokens.begin(), tokens.end());

  std::vector<double> scores(index.document_count(), 0.0);
  for (std::size_t f = 0; f < kTextFieldCount; ++f) {
    const double weight = query.field_weights[f];
    if (weight == 0.0) continue;
    const auto& field = index.field(static_cast<TextField>(f));
    for (const auto& term : terms) {
      auto it = field.postings.find(term);
      if (it == field.postings.end()) continue;
      const double idf = bm25_idf(index.document_count(), it->second.size());
      for (const auto& p : it->second) {
        const double tf = p.tf;
        const double norm = 1.0 - params.b + params.b * field.lengths[p.doc] / field.average_length;
        scores[p.doc] += weight * idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
      }
    }
  }

  RankedList out;
  out.provenance = "text";
  for (std::size_t doc = 0; doc < scores.size(); ++doc) {
    if (scores[doc] > 0.0) out.entries.push_back({index.shot_id(doc), scores[doc]});
  }
  sort_by_score(out.entries);
  return out;
}

}  // namespace kis
