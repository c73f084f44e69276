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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kis/color_sketch.hpp"
#include "kis/concept_algebra.hpp"
#include "kis/config.hpp"
#include "kis/corpus.hpp"
#include "kis/fusion.hpp"
#include "kis/ranked_list.hpp"
#include "kis/shot_filters.hpp"
#include "kis/text_search.hpp"

namespace kis {

/// Corpus plus every query-independent structure derived from it. Immutable
/// once built and shared read-only by all sessions.
class Engine {
 public:
  /// Builds all indexes. A prebuilt color index (e.g. from the cache file)
  /// is used as-is when given.
  static std::shared_ptr<const Engine> build(Corpus corpus, EngineConfig config = {},
                                             std::optional<ColorIndex> color_index = std::nullopt);

  const Corpus& corpus() const noexcept { return corpus_; }
  const EngineConfig& config() const noexcept { return config_; }
  const ColorIndex& color_index() const noexcept { return color_; }
  const TextIndex& text_index() const noexcept { return text_; }
  const VerdictMap& verdicts() const noexcept { return verdicts_; }
  const FeedbackFeatures& feedback_features() const noexcept { return *features_; }

 private:
  Engine(Corpus corpus, EngineConfig config, ColorIndex color);

  Corpus corpus_;
  EngineConfig config_;
  ColorIndex color_;
  TextIndex text_;
  VerdictMap verdicts_;
  std::unique_ptr<FeedbackFeatures> features_;
};

struct ModalityWeights {
  double sketch = 1.0;
  double text = 1.0;
  double concepts = 1.0;

  friend bool operator==(const ModalityWeights&, const ModalityWeights&) = default;
};

struct CompositeQuery {
  std::optional<SketchQuery> sketch;
  std::optional<TextQuery> text;
  std::optional<std::string> concept_query;
  ModalityWeights weights;
  FilterFlags flags;
  std::size_t limit = 1000;

  friend bool operator==(const CompositeQuery&, const CompositeQuery&) = default;
};

/// Runs each present modality, fuses with reciprocal-rank fusion, filters,
/// and truncates to the limit. Sub-module failures are rethrown as
/// ModalityError tagged with the modality name.
RankedList execute_composite(const Engine& engine, const CompositeQuery& query);

struct VideoGroup {
  std::string video_id;
  std::vector<RankedEntry> shots;  // in ranked order
  double best_score = 0.0;

  friend bool operator==(const VideoGroup&, const VideoGroup&) = default;
};

/// Groups a ranked list by video; videos ordered by their best shot's rank.
std::vector<VideoGroup> group_by_video(const RankedList& list, const Corpus& corpus);

/// The traditional frame-based view: the list itself.
inline const RankedList& flat_view(const RankedList& list) { return list; }

}  // namespace kis
