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
#include <span>
#include <string>
#include <vector>

#include "kis/color_sketch.hpp"
#include "kis/corpus.hpp"
#include "kis/ranked_list.hpp"

namespace kis {

struct FusionInput {
  std::reference_wrapper<const RankedList> list;
  double weight = 1.0;
};

/// Weighted reciprocal-rank fusion: each list adds weight / (k + rank) for
/// every shot it contains (rank is 1-based). Lists with weight 0 are skipped.
/// Descending score, ties by shot id.
RankedList fuse(std::span<const FusionInput> lists, double k = 60.0);

/// Per-shot feature vectors for relevance feedback: the shot's concept-bank
/// row and its centroid weights rasterized onto the color index's
/// (cell, palette bin) grid, each block L2-normalized, then concatenated.
class FeedbackFeatures {
 public:
  FeedbackFeatures(const Corpus& corpus, const ColorIndex& index);

  /// Cosine similarity of two shots' feature vectors, in [0,1].
  double similarity(std::size_t a, std::size_t b) const;

  std::size_t size() const noexcept { return palette_blocks_.size(); }

  /// Dense copy of a shot's concatenated vector (concept block first).
  std::vector<double> dense_vector(std::size_t shot) const;
  std::size_t palette_dimension() const noexcept { return palette_dimension_; }

 private:
  struct Sparse {
    std::vector<std::uint32_t> keys;  // ascending
    std::vector<double> values;       // L2-normalized
  };

  const ScoreBank* concept_bank_ = nullptr;
  std::vector<double> concept_norms_;
  std::vector<Sparse> palette_blocks_;
  std::size_t palette_dimension_ = 0;
};

/// Re-ranks `base` by similarity to user-marked positive shots.
/// new_score = lambda * minmax(base score) + (1 - lambda) * max cosine to a
/// positive. Positives are pinned on top: first those in base order, then any
/// not in the base list by shot id.
RankedList feedback_rerank(const RankedList& base, std::span<const std::string> positives, const Corpus& corpus,
                           const FeedbackFeatures& features, double lambda = 0.5);

}  // namespace kis
